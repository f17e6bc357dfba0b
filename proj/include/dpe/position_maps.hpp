#pragma once

// Relative-position maps. Every map takes the non-negative distance
// rel = query_position - key_position and returns the effective index fed to
// the rotation. All maps are the identity on [0, w] and non-decreasing.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dpe {

std::int64_t map_standard(std::int64_t rel);
std::int64_t map_rerope(std::int64_t rel, std::int64_t w);
std::int64_t map_self_extend(std::int64_t rel, std::int64_t w, std::int64_t g);
std::int64_t map_detection(std::int64_t rel, std::int64_t t, std::int64_t w, std::int64_t L);
std::int64_t map_dpe(std::int64_t rel, std::int64_t s, std::int64_t w, std::int64_t e, bool clamp = true);

namespace maps {
struct Standard {
    bool operator==(const Standard&) const = default;
};
struct ReRope {
    std::int64_t w = 2048;
    bool operator==(const ReRope&) const = default;
};
struct SelfExtend {
    std::int64_t w = 1024;
    std::int64_t g = 32;
    bool operator==(const SelfExtend&) const = default;
};
struct Detection {
    std::int64_t t = 4096;
    std::int64_t w = 1024;
    std::int64_t L = 131072;
    bool operator==(const Detection&) const = default;
};
struct Dpe {
    std::int64_t s = 1;
    std::int64_t w = 1024;
    std::int64_t e = 0;
    bool clamp = true;
    bool operator==(const Dpe&) const = default;
};
}  // namespace maps

class PositionMapSpec {
public:
    using Kind = std::variant<maps::Standard, maps::ReRope, maps::SelfExtend, maps::Detection, maps::Dpe>;

    PositionMapSpec() = default;
    PositionMapSpec(Kind kind);  // validates parameters

    const Kind& kind() const noexcept { return kind_; }
    std::int64_t operator()(std::int64_t rel) const;
    // Largest rel kept at its true value; INT64_MAX for Standard.
    std::int64_t window() const noexcept;
    bool is_standard() const noexcept { return std::holds_alternative<maps::Standard>(kind_); }
    std::string describe() const;

    bool operator==(const PositionMapSpec&) const = default;

private:
    Kind kind_ = maps::Standard{};
};

// Per-token form of a scaled map, used by the two-pass engine. For rel > w the
// effective index is qidx(m) - kidx(n) with
//   kidx(n) = floor(n / s),  qidx(m) = floor((m - w) / s) + w,
// capped at e when clamp is set. When s divides w this is the same as
// floor(m / s) + (w - floor(w / s)); the form above stays within 1 of map_dpe
// for every s and w, the other can drift by 2 (e.g. s = 32, w = 16).
// `s == 0` encodes the constant ReRoPE rule (kidx = 0, qidx = w).
struct SeparableRule {
    std::int64_t s = 1;
    std::int64_t w = 0;
    std::int64_t e = 0;
    bool clamp = false;

    std::int64_t key_index(std::int64_t n) const noexcept { return s == 0 ? 0 : n / s; }
    std::int64_t query_index(std::int64_t m) const noexcept;
    // Effective index for query position m >= key position n.
    std::int64_t operator()(std::int64_t m, std::int64_t n) const;

    bool operator==(const SeparableRule&) const = default;
};

// Separable counterpart of a rel-based map, when one exists (ReRoPE,
// Self-Extend, DPE). Standard and Detection have none.
std::optional<SeparableRule> separable_form(const PositionMapSpec& spec);

struct GroupRange {
    int begin = 0;  // first pair index
    int end = 0;    // one past the last pair index
    bool operator==(const GroupRange&) const = default;
};

// Contiguous equal partition of [0, pairs) into num_groups blocks; the last
// block absorbs any remainder (a warning is emitted in that case).
std::vector<GroupRange> partition_groups(int pairs, int num_groups, bool warn_on_remainder = true);

struct DimensionPlan {
    int head_dim = 128;
    std::int64_t train_length = 8192;
    std::int64_t target_length = 131072;
    std::int64_t window = 1024;
    bool clamp = true;
    std::vector<GroupRange> groups;
    std::vector<std::int64_t> effective_lengths;  // E
    std::vector<std::int64_t> scale_sizes;        // S = floor(target / E)
    std::vector<std::vector<int>> key_dims;       // D_h, sorted pair indices per head
    std::vector<std::string> warnings;            // not part of equality

    int num_groups() const noexcept { return static_cast<int>(groups.size()); }
    int pairs() const noexcept { return head_dim / 2; }
    std::size_t heads() const noexcept { return key_dims.size(); }
    int group_of(int pair) const;

    // Map for one pair of one head: the group's DPE map for key dimensions,
    // the standard map otherwise.
    PositionMapSpec map_for(std::size_t head, int pair) const;

    // Throws ValidationError on any broken invariant.
    void validate() const;

    bool operator==(const DimensionPlan& o) const {
        return head_dim == o.head_dim && train_length == o.train_length && target_length == o.target_length &&
               window == o.window && clamp == o.clamp && groups == o.groups &&
               effective_lengths == o.effective_lengths && scale_sizes == o.scale_sizes && key_dims == o.key_dims;
    }
};

DimensionPlan build_plan(std::int64_t train_length, std::int64_t target_length, int num_groups, std::int64_t window,
                         const std::vector<std::int64_t>& effective_lengths,
                         const std::vector<std::vector<int>>& key_dims, int head_dim = 128, bool clamp = true);

}  // namespace dpe
