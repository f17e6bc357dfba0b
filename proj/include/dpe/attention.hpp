#pragma once

// Causal multi-head attention where every frequency pair of every head
// follows its own relative-position map.
//
// Logit convention: for query position m and key position n <= m,
//   logit(m, n) = scale * sum_j k_j^T R(theta_j, map_j(m - n)) q_j,
// which equals scale * rotate(q, m) . rotate(k, n) for the standard map.

#include "dpe/position_maps.hpp"
#include "dpe/rope.hpp"
#include "dpe/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dpe {

using IndexRule = std::variant<PositionMapSpec, SeparableRule>;

// One rule per (head, pair).
struct PositionLayout {
    std::vector<std::vector<IndexRule>> rules;

    std::size_t heads() const noexcept { return rules.size(); }

    static PositionLayout uniform(std::size_t heads, int pairs, const PositionMapSpec& spec);
    // Rel-based DPE maps for key dimensions, or their per-token separable form.
    static PositionLayout from_plan(const DimensionPlan& plan, bool separable = false);
    // Every pair of group i (all heads) follows group_maps[i].
    static PositionLayout per_group(std::size_t heads, const std::vector<GroupRange>& groups,
                                    const std::vector<PositionMapSpec>& group_maps);
    // Replaces each rel-based map by its separable form where one exists.
    PositionLayout separable() const;
};

struct AttentionProblem {
    Tensor3 queries;  // H x L x d
    Tensor3 keys;
    Tensor3 values;
    FrequencyBasis basis{2, 10000.0};
    std::variant<PositionMapSpec, DimensionPlan, PositionLayout> positions = PositionMapSpec{};
    std::optional<double> logit_scale;  // default basis.logit_temperature() / sqrt(d)
    bool causal = true;

    std::size_t heads() const noexcept { return queries.heads(); }
    std::size_t length() const noexcept { return queries.length(); }
    int head_dim() const noexcept { return static_cast<int>(queries.width()); }
    double effective_logit_scale() const;
    // Checks shapes, finiteness and the layout; returns the resolved layout.
    PositionLayout validated_layout() const;
};

struct AttentionOutput {
    Tensor3 output;
    std::vector<float> logits;  // H x L x L, -inf above the diagonal; exact engine on request
    std::size_t workspace_bytes = 0;
};

struct ExactOptions {
    std::int64_t max_length = 4096;
    bool separable_maps = false;  // substitute the per-token forms used by the tiled engine
    bool keep_logits = false;
    std::size_t workers = 0;      // 0: default_workers()
};

struct TiledOptions {
    int tile = 128;
    std::size_t workers = 0;
};

AttentionOutput attend_exact(const AttentionProblem& problem, const ExactOptions& options = {});
AttentionOutput attend_tiled(const AttentionProblem& problem, const TiledOptions& options = {});

struct BenchRow {
    std::string engine;
    std::int64_t length = 0;
    std::size_t heads = 0;
    int head_dim = 0;
    int tile = 0;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    std::size_t peak_bytes = 0;
    double cv() const noexcept { return mean_ms > 0.0 ? std_ms / mean_ms : 0.0; }
};

struct BenchConfig {
    std::vector<std::int64_t> lengths;
    std::size_t heads = 8;
    int head_dim = 128;
    int repeats = 3;
    int tile = 128;
    bool include_exact = false;  // only for lengths within the exact cap
    std::uint64_t seed = 0;
    std::size_t workers = 0;
};

// Times standard-map and DPE-map tiled attention (plus the exact engine on
// request) on random problems. The DPE plan keeps the reference scale sizes
// [2, 8, 2, 8, 32, 32, 16, 4] at every length.
std::vector<BenchRow> benchmark(const BenchConfig& config);

struct OverheadRow {
    std::int64_t length = 0;
    double standard_ms = 0.0;
    double dpe_ms = 0.0;
    double ratio = 0.0;
    double cv_standard = 0.0;
    double cv_dpe = 0.0;
};
std::vector<OverheadRow> overhead_summary(const std::vector<BenchRow>& rows);

// Plan used by benchmark(): C = 8 groups, window L/64, effective lengths
// L / S for the fixed scale sizes, top-3/4 random key pairs per head.
DimensionPlan benchmark_plan(std::int64_t length, std::size_t heads, int head_dim, std::uint64_t seed);

}  // namespace dpe
