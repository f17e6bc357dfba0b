#pragma once

// Rotary position embedding primitives: angular-frequency construction,
// per-pair rotation at integer position indices, and the relative score
// k^T R(theta, rel) q that every attention engine in the project evaluates.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace dpe {

struct NoScaling {
    bool operator==(const NoScaling&) const = default;
};

// Base rescaling b' = b * factor^(d / (d - 2)).
struct NtkDynamic {
    double factor = 16.0;
    bool operator==(const NtkDynamic&) const = default;
};

// By-parts interpolation: pairs rotating fast over the original context keep
// their frequency, slow pairs are divided by `scale`, and a linear ramp over
// rotations-per-context blends the band in between. `attn_factor` multiplies
// attention logits.
struct YarnByParts {
    double beta_fast = 32.0;
    double beta_slow = 1.0;
    double scale = 16.0;
    double attn_factor = 1.3862943611198906;  // ln 4
    std::int64_t original_length = 8192;
    bool operator==(const YarnByParts&) const = default;
};

using FrequencyScaling = std::variant<NoScaling, NtkDynamic, YarnByParts>;

class FrequencyBasis {
public:
    FrequencyBasis(int head_dim, double base, FrequencyScaling scaling = NoScaling{});

    int head_dim() const noexcept { return head_dim_; }
    int pairs() const noexcept { return head_dim_ / 2; }
    double base() const noexcept { return base_; }
    const FrequencyScaling& scaling() const noexcept { return scaling_; }
    std::span<const double> thetas() const noexcept { return thetas_; }
    double theta(int pair) const { return thetas_.at(static_cast<std::size_t>(pair)); }

    // Multiplier applied on top of 1/sqrt(d); 1 unless YaRN supplies one.
    double logit_temperature() const noexcept;

private:
    int head_dim_;
    double base_;
    FrequencyScaling scaling_;
    std::vector<double> thetas_;
};

FrequencyBasis build_basis(int head_dim, double base = 10000.0, FrequencyScaling scaling = NoScaling{});

struct RotatedVector {
    std::vector<float> values;
    std::vector<std::int64_t> position_index;  // one per frequency pair
};

RotatedVector rotate(const FrequencyBasis& basis, std::span<const float> vec,
                     std::span<const std::int64_t> position_index);
RotatedVector rotate(const FrequencyBasis& basis, std::span<const float> vec, std::int64_t position);

// Inverse of rotate: rotation by the negated angle.
std::vector<float> unrotate(const FrequencyBasis& basis, std::span<const float> vec,
                            std::span<const std::int64_t> position_index);

// sum_j q_j . R(theta_j, rel_index[j]) k_j, evaluated in double.
// With a constant rel_index r this equals rotate(q, m) . rotate(k, m + r).
double relative_rotation_score(const FrequencyBasis& basis, std::span<const float> q,
                               std::span<const float> k, std::span<const std::int64_t> rel_index);

// cos/sin(v * theta_j) for v in [0, max_index], computed once in double.
class AngleTable {
public:
    AngleTable(const FrequencyBasis& basis, std::int64_t max_index);

    std::int64_t max_index() const noexcept { return max_index_; }
    double cos(int pair, std::int64_t index) const { return cos_[offset(pair, index)]; }
    double sin(int pair, std::int64_t index) const { return sin_[offset(pair, index)]; }

    // Rotates one pair (x, y) in place by index * theta_pair.
    void rotate_pair(int pair, std::int64_t index, double& x, double& y) const;

private:
    std::size_t offset(int pair, std::int64_t index) const {
        return static_cast<std::size_t>(pair) * static_cast<std::size_t>(max_index_ + 1) +
               static_cast<std::size_t>(index);
    }

    std::int64_t max_index_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

}  // namespace dpe
