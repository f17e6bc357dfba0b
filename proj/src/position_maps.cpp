#include "dpe/position_maps.hpp"

#include "dpe/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace dpe {

namespace {

void check_rel(std::int64_t rel) { require(rel >= 0, "relative distance must be non-negative, got " + std::to_string(rel)); }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

std::int64_t map_standard(std::int64_t rel) {
    check_rel(rel);
    return rel;
}

std::int64_t map_rerope(std::int64_t rel, std::int64_t w) {
    check_rel(rel);
    require(w >= 0, "window must be non-negative");
    return rel <= w ? rel : w;
}

std::int64_t map_self_extend(std::int64_t rel, std::int64_t w, std::int64_t g) {
    check_rel(rel);
    require(w >= 0, "window must be non-negative");
    require(g >= 1, "group size must be >= 1");
    return rel <= w ? rel : (rel - w) / g + w;
}

std::int64_t map_detection(std::int64_t rel, std::int64_t t, std::int64_t w, std::int64_t L) {
    check_rel(rel);
    require(w >= 0, "window must be non-negative");
    require(t >= 1, "detecting length must be >= 1");
    require(L > w, "sequence length must exceed the window");
    if (rel <= w) return rel;
    // (rel - w) * t stays far below 2^63 for any realistic length.
    return (rel - w) * t / L + w;
}

std::int64_t map_dpe(std::int64_t rel, std::int64_t s, std::int64_t w, std::int64_t e, bool clamp) {
    check_rel(rel);
    require(w >= 0, "window must be non-negative");
    require(s >= 1, "scale size must be >= 1");
    if (rel <= w) return rel;
    const std::int64_t v = (rel - w) / s + w;
    return clamp ? std::min(v, e) : v;
}

PositionMapSpec::PositionMapSpec(Kind kind) : kind_(kind) {
    std::visit(
        [](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, maps::ReRope>) {
                require(k.w >= 0, "rerope window must be >= 0");
            } else if constexpr (std::is_same_v<T, maps::SelfExtend>) {
                require(k.w >= 0, "self-extend window must be >= 0");
                require(k.g >= 1, "self-extend group size must be >= 1");
            } else if constexpr (std::is_same_v<T, maps::Detection>) {
                require(k.w >= 0, "detection window must be >= 0");
                require(k.t >= 1, "detecting length must be >= 1");
                require(k.L > k.w, "detection sequence length must exceed the window");
            } else if constexpr (std::is_same_v<T, maps::Dpe>) {
                require(k.w >= 0, "dpe window must be >= 0");
                require(k.s >= 1, "dpe scale size must be >= 1");
                require(!k.clamp || k.e > k.w, "clamped dpe map needs e > w");
            }
        },
        kind_);
}

std::int64_t PositionMapSpec::operator()(std::int64_t rel) const {
    return std::visit(
        [rel](const auto& k) -> std::int64_t {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, maps::Standard>) return map_standard(rel);
            else if constexpr (std::is_same_v<T, maps::ReRope>) return map_rerope(rel, k.w);
            else if constexpr (std::is_same_v<T, maps::SelfExtend>) return map_self_extend(rel, k.w, k.g);
            else if constexpr (std::is_same_v<T, maps::Detection>) return map_detection(rel, k.t, k.w, k.L);
            else return map_dpe(rel, k.s, k.w, k.e, k.clamp);
        },
        kind_);
}

std::int64_t PositionMapSpec::window() const noexcept {
    return std::visit(
        [](const auto& k) -> std::int64_t {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, maps::Standard>) return std::numeric_limits<std::int64_t>::max();
            else return k.w;
        },
        kind_);
}

std::string PositionMapSpec::describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, maps::Standard>) return "standard";
            else if constexpr (std::is_same_v<T, maps::ReRope>) return "rerope(w=" + std::to_string(k.w) + ")";
            else if constexpr (std::is_same_v<T, maps::SelfExtend>)
                return "self_extend(w=" + std::to_string(k.w) + ",g=" + std::to_string(k.g) + ")";
            else if constexpr (std::is_same_v<T, maps::Detection>)
                return "detection(t=" + std::to_string(k.t) + ",w=" + std::to_string(k.w) + ",L=" + std::to_string(k.L) + ")";
            else
                return "dpe(s=" + std::to_string(k.s) + ",w=" + std::to_string(k.w) + ",e=" + std::to_string(k.e) +
                       (k.clamp ? ",clamp)" : ")");
        },
        kind_);
}

std::int64_t SeparableRule::query_index(std::int64_t m) const noexcept {
    if (s == 0) return w;
    return floor_div(m - w, s) + w;
}

std::int64_t SeparableRule::operator()(std::int64_t m, std::int64_t n) const {
    require(m >= n, "query position must not precede key position");
    const std::int64_t rel = m - n;
    if (rel <= w) return rel;
    const std::int64_t v = query_index(m) - key_index(n);
    return clamp ? std::min(v, e) : v;
}

std::optional<SeparableRule> separable_form(const PositionMapSpec& spec) {
    return std::visit(
        [](const auto& k) -> std::optional<SeparableRule> {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, maps::ReRope>) return SeparableRule{0, k.w, 0, false};
            else if constexpr (std::is_same_v<T, maps::SelfExtend>) return SeparableRule{k.g, k.w, 0, false};
            else if constexpr (std::is_same_v<T, maps::Dpe>) return SeparableRule{k.s, k.w, k.e, k.clamp};
            else return std::nullopt;
        },
        spec.kind());
}

std::vector<GroupRange> partition_groups(int pairs, int num_groups, bool warn_on_remainder) {
    require(num_groups >= 1, "number of groups must be >= 1");
    require(num_groups <= pairs, "more groups (" + std::to_string(num_groups) + ") than frequency pairs (" +
                                     std::to_string(pairs) + ")");
    const int size = pairs / num_groups;
    if (pairs % num_groups != 0 && warn_on_remainder) {
        warn(std::to_string(num_groups) + " groups do not divide " + std::to_string(pairs) +
             " pairs; the last group absorbs " + std::to_string(pairs % num_groups) + " extra pairs");
    }
    std::vector<GroupRange> out;
    for (int i = 0; i < num_groups; ++i) {
        out.push_back({i * size, i + 1 == num_groups ? pairs : (i + 1) * size});
    }
    return out;
}

int DimensionPlan::group_of(int pair) const {
    for (int i = 0; i < num_groups(); ++i) {
        if (pair >= groups[static_cast<std::size_t>(i)].begin && pair < groups[static_cast<std::size_t>(i)].end) return i;
    }
    fail("pair index " + std::to_string(pair) + " is outside every group");
}

PositionMapSpec DimensionPlan::map_for(std::size_t head, int pair) const {
    const auto& dims = key_dims.at(head);
    if (!std::binary_search(dims.begin(), dims.end(), pair)) return {};
    const auto g = static_cast<std::size_t>(group_of(pair));
    return PositionMapSpec(maps::Dpe{scale_sizes[g], window, effective_lengths[g], clamp});
}

void DimensionPlan::validate() const {
    require(head_dim >= 2 && head_dim % 2 == 0, "plan head_dim must be even and >= 2");
    require(window >= 0, "plan window must be >= 0");
    require(train_length >= 1, "train length must be >= 1");
    require(target_length >= train_length, "target length must be >= train length");
    require(!groups.empty(), "plan has no groups");
    require(effective_lengths.size() == groups.size(), "effective lengths must have one entry per group");
    require(scale_sizes.size() == groups.size(), "scale sizes must have one entry per group");

    int cursor = 0;
    for (const auto& g : groups) {
        require(g.begin == cursor && g.end > g.begin, "groups must partition the pair indices contiguously");
        cursor = g.end;
    }
    require(cursor == pairs(), "groups must cover every pair index");

    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto e = effective_lengths[i];
        require(e > window, "effective length " + std::to_string(e) + " of group " + std::to_string(i) +
                                " must exceed the window " + std::to_string(window));
        require(scale_sizes[i] == target_length / e, "scale size of group " + std::to_string(i) +
                                                         " must equal floor(target / E)");
        require(scale_sizes[i] >= 1, "effective length of group " + std::to_string(i) + " exceeds the target length");
    }

    const std::size_t k = key_dims.empty() ? 0 : key_dims.front().size();
    for (std::size_t h = 0; h < key_dims.size(); ++h) {
        const auto& d = key_dims[h];
        require(d.size() == k, "every head must select the same number of key dimensions");
        require(std::is_sorted(d.begin(), d.end()) && std::adjacent_find(d.begin(), d.end()) == d.end(),
                "key dimensions must be sorted and unique");
        for (int j : d) require(j >= 0 && j < pairs(), "key dimension " + std::to_string(j) + " out of range");
    }
}

DimensionPlan build_plan(std::int64_t train_length, std::int64_t target_length, int num_groups, std::int64_t window,
                         const std::vector<std::int64_t>& effective_lengths,
                         const std::vector<std::vector<int>>& key_dims, int head_dim, bool clamp) {
    require(head_dim >= 2 && head_dim % 2 == 0, "head_dim must be even and >= 2");
    require(static_cast<int>(effective_lengths.size()) == num_groups,
            "expected " + std::to_string(num_groups) + " effective lengths, got " +
                std::to_string(effective_lengths.size()));
    require(target_length >= train_length, "target length must be >= train length");

    DimensionPlan plan;
    plan.head_dim = head_dim;
    plan.train_length = train_length;
    plan.target_length = target_length;
    plan.window = window;
    plan.clamp = clamp;
    if ((head_dim / 2) % num_groups != 0) {
        plan.warnings.push_back(std::to_string(num_groups) + " groups do not divide " + std::to_string(head_dim / 2) +
                                " pairs; the last group absorbs the remainder");
    }
    plan.groups = partition_groups(head_dim / 2, num_groups, false);
    plan.effective_lengths = effective_lengths;
    for (auto e : effective_lengths) {
        require(e > window, "effective length " + std::to_string(e) + " must exceed the window " + std::to_string(window));
        plan.scale_sizes.push_back(target_length / e);
    }
    for (auto dims : key_dims) {
        std::sort(dims.begin(), dims.end());
        plan.key_dims.push_back(std::move(dims));
    }
    if (!plan.key_dims.empty() && plan.key_dims.front().empty()) {
        plan.warnings.push_back("no key dimensions selected; every pair keeps the standard map");
    }
    plan.validate();
    return plan;
}

}  // namespace dpe
