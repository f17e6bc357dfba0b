#include "dpe/rope.hpp"

#include "dpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dpe {

namespace {

void check_finite(double v, const char* name) {
    require(std::isfinite(v), std::string("scaling parameter ") + name + " must be finite");
}

// Pair index at which a frequency completes `rotations` turns over `context`.
double yarn_correction_dim(double rotations, int head_dim, double base, std::int64_t context) {
    return head_dim * std::log(static_cast<double>(context) / (rotations * 2.0 * std::numbers::pi)) /
           (2.0 * std::log(base));
}

std::vector<double> plain_thetas(int head_dim, double base) {
    std::vector<double> out(static_cast<std::size_t>(head_dim / 2));
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = std::pow(base, -2.0 * static_cast<double>(j) / head_dim);
    }
    return out;
}

}  // namespace

FrequencyBasis::FrequencyBasis(int head_dim, double base, FrequencyScaling scaling)
    : head_dim_(head_dim), base_(base), scaling_(scaling) {
    require(head_dim >= 2 && head_dim % 2 == 0, "head_dim must be even and >= 2, got " + std::to_string(head_dim));
    require(std::isfinite(base) && base > 1.0, "base must be finite and > 1");

    if (const auto* ntk = std::get_if<NtkDynamic>(&scaling_)) {
        check_finite(ntk->factor, "factor");
        require(ntk->factor >= 1.0, "NTK factor must be >= 1");
        require(head_dim > 2, "NTK base rescaling needs head_dim > 2");
        const double scaled = base * std::pow(ntk->factor, static_cast<double>(head_dim) / (head_dim - 2));
        thetas_ = plain_thetas(head_dim, scaled);
    } else if (const auto* yarn = std::get_if<YarnByParts>(&scaling_)) {
        check_finite(yarn->beta_fast, "beta_fast");
        check_finite(yarn->beta_slow, "beta_slow");
        check_finite(yarn->scale, "scale");
        check_finite(yarn->attn_factor, "attn_factor");
        require(yarn->scale >= 1.0, "YaRN scale must be >= 1");
        require(yarn->beta_fast > 0.0 && yarn->beta_slow > 0.0, "YaRN betas must be positive");
        require(yarn->beta_fast >= yarn->beta_slow, "YaRN beta_fast must be >= beta_slow");
        require(yarn->attn_factor > 0.0, "YaRN attn_factor must be positive");
        require(yarn->original_length > 0, "YaRN original_length must be positive");

        const int pairs = head_dim / 2;
        double low = std::floor(yarn_correction_dim(yarn->beta_fast, head_dim, base, yarn->original_length));
        double high = std::ceil(yarn_correction_dim(yarn->beta_slow, head_dim, base, yarn->original_length));
        low = std::max(low, 0.0);
        high = std::min(high, static_cast<double>(head_dim - 1));
        if (low == high) high += 0.001;

        thetas_ = plain_thetas(head_dim, base);
        for (int j = 0; j < pairs; ++j) {
            const double ramp = std::clamp((j - low) / (high - low), 0.0, 1.0);
            const double keep = 1.0 - ramp;  // 1 keeps the original frequency
            auto& theta = thetas_[static_cast<std::size_t>(j)];
            theta = theta / yarn->scale * (1.0 - keep) + theta * keep;
        }
    } else {
        thetas_ = plain_thetas(head_dim, base);
    }

    for (std::size_t j = 0; j < thetas_.size(); ++j) {
        require(std::isfinite(thetas_[j]) && thetas_[j] > 0.0, "non-finite or non-positive frequency");
        if (j > 0) require(thetas_[j] < thetas_[j - 1], "frequencies must be strictly decreasing");
    }
}

double FrequencyBasis::logit_temperature() const noexcept {
    if (const auto* yarn = std::get_if<YarnByParts>(&scaling_)) return yarn->attn_factor;
    return 1.0;
}

FrequencyBasis build_basis(int head_dim, double base, FrequencyScaling scaling) {
    return FrequencyBasis(head_dim, base, scaling);
}

namespace {

void check_lengths(const FrequencyBasis& basis, std::size_t vec, std::size_t idx) {
    require(vec == static_cast<std::size_t>(basis.head_dim()),
            "vector length " + std::to_string(vec) + " does not match head_dim " + std::to_string(basis.head_dim()));
    require(idx == static_cast<std::size_t>(basis.pairs()),
            "position index length " + std::to_string(idx) + " does not match pair count " +
                std::to_string(basis.pairs()));
}

std::vector<float> rotate_signed(const FrequencyBasis& basis, std::span<const float> vec,
                                 std::span<const std::int64_t> position_index, double sign) {
    check_lengths(basis, vec.size(), position_index.size());
    std::vector<float> out(vec.size());
    for (int j = 0; j < basis.pairs(); ++j) {
        const auto p = position_index[static_cast<std::size_t>(j)];
        require(p >= 0, "position indices must be non-negative");
        const double angle = sign * static_cast<double>(p) * basis.theta(j);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double x = vec[2 * j];
        const double y = vec[2 * j + 1];
        out[2 * j] = static_cast<float>(c * x - s * y);
        out[2 * j + 1] = static_cast<float>(s * x + c * y);
    }
    return out;
}

}  // namespace

RotatedVector rotate(const FrequencyBasis& basis, std::span<const float> vec,
                     std::span<const std::int64_t> position_index) {
    RotatedVector out;
    out.values = rotate_signed(basis, vec, position_index, 1.0);
    out.position_index.assign(position_index.begin(), position_index.end());
    return out;
}

RotatedVector rotate(const FrequencyBasis& basis, std::span<const float> vec, std::int64_t position) {
    const std::vector<std::int64_t> idx(static_cast<std::size_t>(basis.pairs()), position);
    return rotate(basis, vec, idx);
}

std::vector<float> unrotate(const FrequencyBasis& basis, std::span<const float> vec,
                            std::span<const std::int64_t> position_index) {
    return rotate_signed(basis, vec, position_index, -1.0);
}

double relative_rotation_score(const FrequencyBasis& basis, std::span<const float> q,
                               std::span<const float> k, std::span<const std::int64_t> rel_index) {
    check_lengths(basis, q.size(), rel_index.size());
    require(k.size() == q.size(), "query and key lengths differ");
    double total = 0.0;
    for (int j = 0; j < basis.pairs(); ++j) {
        const auto r = rel_index[static_cast<std::size_t>(j)];
        require(r >= 0, "relative indices must be non-negative");
        const double angle = static_cast<double>(r) * basis.theta(j);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double k0 = k[2 * j], k1 = k[2 * j + 1];
        const double q0 = q[2 * j], q1 = q[2 * j + 1];
        // q^T R k with R = [[c, -s], [s, c]]
        total += q0 * (c * k0 - s * k1) + q1 * (s * k0 + c * k1);
    }
    return total;
}

AngleTable::AngleTable(const FrequencyBasis& basis, std::int64_t max_index) : max_index_(max_index) {
    require(max_index >= 0, "angle table needs a non-negative max index");
    const auto width = static_cast<std::size_t>(max_index + 1);
    cos_.resize(width * static_cast<std::size_t>(basis.pairs()));
    sin_.resize(cos_.size());
    for (int j = 0; j < basis.pairs(); ++j) {
        const double theta = basis.theta(j);
        for (std::int64_t v = 0; v <= max_index; ++v) {
            const double angle = static_cast<double>(v) * theta;
            cos_[offset(j, v)] = std::cos(angle);
            sin_[offset(j, v)] = std::sin(angle);
        }
    }
}

void AngleTable::rotate_pair(int pair, std::int64_t index, double& x, double& y) const {
    const double c = cos(pair, index);
    const double s = sin(pair, index);
    const double nx = c * x - s * y;
    y = s * x + c * y;
    x = nx;
}

}  // namespace dpe
