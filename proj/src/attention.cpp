#include "dpe/attention.hpp"

#include "dpe/error.hpp"
#include "dpe/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace dpe {

// ---------------------------------------------------------------------------
// Layouts

PositionLayout PositionLayout::uniform(std::size_t heads, int pairs, const PositionMapSpec& spec) {
    PositionLayout out;
    out.rules.assign(heads, std::vector<IndexRule>(static_cast<std::size_t>(pairs), spec));
    return out;
}

PositionLayout PositionLayout::from_plan(const DimensionPlan& plan, bool separable) {
    plan.validate();
    PositionLayout out;
    out.rules.resize(plan.heads());
    for (std::size_t h = 0; h < plan.heads(); ++h) {
        auto& row = out.rules[h];
        row.reserve(static_cast<std::size_t>(plan.pairs()));
        for (int j = 0; j < plan.pairs(); ++j) {
            const auto spec = plan.map_for(h, j);
            if (separable && !spec.is_standard()) {
                row.emplace_back(*separable_form(spec));
            } else {
                row.emplace_back(spec);
            }
        }
    }
    return out;
}

PositionLayout PositionLayout::per_group(std::size_t heads, const std::vector<GroupRange>& groups,
                                         const std::vector<PositionMapSpec>& group_maps) {
    require(groups.size() == group_maps.size(), "one map per group is required");
    require(!groups.empty(), "at least one group is required");
    std::vector<IndexRule> row(static_cast<std::size_t>(groups.back().end), PositionMapSpec{});
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (int j = groups[i].begin; j < groups[i].end; ++j) row[static_cast<std::size_t>(j)] = group_maps[i];
    }
    PositionLayout out;
    out.rules.assign(heads, row);
    return out;
}

PositionLayout PositionLayout::separable() const {
    PositionLayout out = *this;
    for (auto& row : out.rules) {
        for (auto& rule : row) {
            if (const auto* spec = std::get_if<PositionMapSpec>(&rule)) {
                if (auto sep = separable_form(*spec)) rule = *sep;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Problem validation

double AttentionProblem::effective_logit_scale() const {
    if (logit_scale) return *logit_scale;
    return basis.logit_temperature() / std::sqrt(static_cast<double>(head_dim()));
}

PositionLayout AttentionProblem::validated_layout() const {
    require(causal, "only causal attention is supported");
    require(queries.same_shape(keys) && queries.same_shape(values), "queries, keys and values must share a shape");
    require(heads() >= 1, "at least one head is required");
    require(head_dim() == basis.head_dim(), "tensor width does not match the basis head_dim");
    for (const auto* t : {&queries, &keys, &values}) {
        for (float v : t->data()) require(std::isfinite(v), "attention inputs must be finite");
    }
    require(std::isfinite(effective_logit_scale()), "logit scale must be finite");

    PositionLayout layout = std::visit(
        [&](const auto& p) -> PositionLayout {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, PositionMapSpec>) return PositionLayout::uniform(heads(), basis.pairs(), p);
            else if constexpr (std::is_same_v<T, DimensionPlan>) return PositionLayout::from_plan(p);
            else return p;
        },
        positions);
    require(layout.heads() == heads(), "position layout has " + std::to_string(layout.heads()) +
                                           " heads, tensors have " + std::to_string(heads()));
    for (const auto& row : layout.rules) {
        require(row.size() == static_cast<std::size_t>(basis.pairs()), "position layout pair count mismatch");
    }
    return layout;
}

namespace {

std::size_t resolve_workers(std::size_t requested) { return requested == 0 ? default_workers() : requested; }

// ---------------------------------------------------------------------------
// Exact engine

// Pairs of one head sharing one rule, with cos/sin tabulated per distinct
// effective index.
struct RuleBucket {
    IndexRule rule;
    std::vector<int> pairs;
    // rel-based: slot_of_rel[rel] -> slot; separable: slot = index.
    std::vector<std::int32_t> slot_of_rel;
    std::size_t slots = 0;
    std::vector<double> cos;  // [local pair][slot]
    std::vector<double> sin;
};

std::vector<RuleBucket> make_buckets(const std::vector<IndexRule>& row, const FrequencyBasis& basis,
                                     std::int64_t length) {
    std::vector<RuleBucket> buckets;
    for (int j = 0; j < static_cast<int>(row.size()); ++j) {
        const auto& rule = row[static_cast<std::size_t>(j)];
        auto it = std::find_if(buckets.begin(), buckets.end(), [&](const RuleBucket& b) { return b.rule == rule; });
        if (it == buckets.end()) {
            buckets.push_back({rule, {}, {}, 0, {}, {}});
            it = std::prev(buckets.end());
        }
        it->pairs.push_back(j);
    }

    for (auto& b : buckets) {
        std::vector<std::int64_t> slot_index;  // slot -> effective index
        if (const auto* spec = std::get_if<PositionMapSpec>(&b.rule)) {
            std::map<std::int64_t, std::int32_t> slot_of_value;
            b.slot_of_rel.resize(static_cast<std::size_t>(length));
            for (std::int64_t rel = 0; rel < length; ++rel) {
                const auto v = (*spec)(rel);
                auto [pos, inserted] = slot_of_value.emplace(v, static_cast<std::int32_t>(slot_index.size()));
                if (inserted) slot_index.push_back(v);
                b.slot_of_rel[static_cast<std::size_t>(rel)] = pos->second;
            }
        } else {
            const auto& sep = std::get<SeparableRule>(b.rule);
            std::int64_t max_index = std::max<std::int64_t>(length - 1, 0);
            if (length > 0) max_index = std::max(max_index, sep.query_index(length - 1));
            if (sep.clamp) max_index = std::max(std::min(max_index, std::max(sep.e, length - 1)), length - 1);
            slot_index.resize(static_cast<std::size_t>(max_index + 1));
            std::iota(slot_index.begin(), slot_index.end(), std::int64_t{0});
        }
        b.slots = slot_index.size();
        b.cos.resize(b.pairs.size() * b.slots);
        b.sin.resize(b.cos.size());
        for (std::size_t p = 0; p < b.pairs.size(); ++p) {
            const double theta = basis.theta(b.pairs[p]);
            for (std::size_t s = 0; s < b.slots; ++s) {
                const double angle = static_cast<double>(slot_index[s]) * theta;
                b.cos[p * b.slots + s] = std::cos(angle);
                b.sin[p * b.slots + s] = std::sin(angle);
            }
        }
    }
    return buckets;
}

}  // namespace

AttentionOutput attend_exact(const AttentionProblem& problem, const ExactOptions& options) {
    PositionLayout layout = problem.validated_layout();
    if (options.separable_maps) layout = layout.separable();
    const auto H = problem.heads();
    const auto L = problem.length();
    const auto d = static_cast<std::size_t>(problem.head_dim());
    require(static_cast<std::int64_t>(L) <= options.max_length,
            "sequence length " + std::to_string(L) + " exceeds the exact-engine cap " +
                std::to_string(options.max_length));

    AttentionOutput out;
    out.output = Tensor3(H, L, d);
    if (options.keep_logits) out.logits.assign(H * L * L, -std::numeric_limits<float>::infinity());
    if (L == 0) return out;

    const double scale = problem.effective_logit_scale();
    std::vector<std::vector<RuleBucket>> buckets(H);
    std::size_t table_bytes = 0;
    for (std::size_t h = 0; h < H; ++h) {
        buckets[h] = make_buckets(layout.rules[h], problem.basis, static_cast<std::int64_t>(L));
        for (const auto& b : buckets[h]) table_bytes += (b.cos.size() * 2) * sizeof(double) + b.slot_of_rel.size() * 4;
    }

    // Work item: one (head, query row).
    parallel_for(H * L, resolve_workers(options.workers), [&](std::size_t item) {
        const std::size_t h = item / L;
        const std::size_t m = item % L;
        const auto q = problem.queries.row(h, m);
        std::vector<double> logits(m + 1);
        for (std::size_t n = 0; n <= m; ++n) {
            const auto k = problem.keys.row(h, n);
            const auto rel = static_cast<std::int64_t>(m - n);
            double total = 0.0;
            for (const auto& b : buckets[h]) {
                std::size_t slot;
                if (const auto* sep = std::get_if<SeparableRule>(&b.rule)) {
                    slot = static_cast<std::size_t>((*sep)(static_cast<std::int64_t>(m), static_cast<std::int64_t>(n)));
                } else {
                    slot = static_cast<std::size_t>(b.slot_of_rel[static_cast<std::size_t>(rel)]);
                }
                for (std::size_t p = 0; p < b.pairs.size(); ++p) {
                    const auto j = static_cast<std::size_t>(b.pairs[p]);
                    const double q0 = q[2 * j], q1 = q[2 * j + 1];
                    const double k0 = k[2 * j], k1 = k[2 * j + 1];
                    const double c = b.cos[p * b.slots + slot];
                    const double s = b.sin[p * b.slots + slot];
                    total += c * (k0 * q0 + k1 * q1) + s * (k1 * q0 - k0 * q1);
                }
            }
            logits[n] = scale * total;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (std::size_t n = 0; n <= m; ++n) {
            if (options.keep_logits) out.logits[(h * L + m) * L + n] = static_cast<float>(logits[n]);
            logits[n] = std::exp(logits[n] - mx);
            sum += logits[n];
        }
        std::vector<double> acc(d, 0.0);
        for (std::size_t n = 0; n <= m; ++n) {
            const auto v = problem.values.row(h, n);
            const double w = logits[n] / sum;
            for (std::size_t c = 0; c < d; ++c) acc[c] += w * v[c];
        }
        auto o = out.output.row(h, m);
        for (std::size_t c = 0; c < d; ++c) o[c] = static_cast<float>(acc[c]);
    });

    out.workspace_bytes = table_bytes + out.logits.size() * sizeof(float);
    return out;
}

// ---------------------------------------------------------------------------
// Tiled engine

namespace {

// Deterministic float dot product with eight independent partial sums.
inline float dot(const float* a, const float* b, std::size_t n) {
    float p[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t u = 0; u < 8; ++u) p[u] += a[i + u] * b[i + u];
    }
    float tail = 0.0f;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((p[0] + p[4]) + (p[1] + p[5])) + ((p[2] + p[6]) + (p[3] + p[7])) + tail;
}

struct ScaledSegment {
    SeparableRule rule;
    std::size_t begin = 0;  // float offset in the permuted layout
    std::size_t end = 0;
};

// Rotated copies of one head in a permuted pair order:
// [standard pairs | segment 0 pairs | segment 1 pairs | ...].
struct TiledHead {
    std::size_t plain_end = 0;               // float offset where scaled segments start
    std::vector<ScaledSegment> segments;
    std::int64_t min_window = 0;
    std::int64_t max_window = 0;
    bool any_clamp = false;
    std::vector<float> qa, ka;  // absolute positions
    std::vector<float> qb, kb;  // scaled-pass indices (plain part equals pass A)
    std::vector<float> qc, kc;  // clamp region: q at e, k at 0 (segments only)
};

void rotate_into(float* dst, const float* src, const FrequencyBasis& basis, int pair, std::int64_t index) {
    const double angle = static_cast<double>(index) * basis.theta(pair);
    const double c = std::cos(angle), s = std::sin(angle);
    const double x = src[2 * pair], y = src[2 * pair + 1];
    dst[0] = static_cast<float>(c * x - s * y);
    dst[1] = static_cast<float>(s * x + c * y);
}

TiledHead prepare_head(const AttentionProblem& problem, const std::vector<IndexRule>& row, std::size_t h) {
    const auto L = problem.length();
    const auto d = static_cast<std::size_t>(problem.head_dim());
    const auto& basis = problem.basis;

    std::vector<int> plain;
    std::vector<std::pair<SeparableRule, std::vector<int>>> groups;
    for (int j = 0; j < static_cast<int>(row.size()); ++j) {
        const auto& rule = row[static_cast<std::size_t>(j)];
        std::optional<SeparableRule> sep;
        if (const auto* spec = std::get_if<PositionMapSpec>(&rule)) {
            if (spec->is_standard()) {
                plain.push_back(j);
                continue;
            }
            sep = separable_form(*spec);
            require(sep.has_value(), "the tiled engine cannot realize " + spec->describe() + "; use attend_exact");
        } else {
            sep = std::get<SeparableRule>(rule);
        }
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == *sep; });
        if (it == groups.end()) {
            groups.push_back({*sep, {}});
            it = std::prev(groups.end());
        }
        it->second.push_back(j);
    }

    TiledHead th;
    std::vector<int> order = plain;
    th.plain_end = plain.size() * 2;
    th.min_window = std::numeric_limits<std::int64_t>::max();
    th.max_window = 0;
    for (const auto& [rule, pairs] : groups) {
        ScaledSegment seg{rule, order.size() * 2, (order.size() + pairs.size()) * 2};
        order.insert(order.end(), pairs.begin(), pairs.end());
        th.segments.push_back(seg);
        th.min_window = std::min(th.min_window, rule.w);
        th.max_window = std::max(th.max_window, rule.w);
        th.any_clamp = th.any_clamp || rule.clamp;
    }

    th.qa.resize(L * d);
    th.ka.resize(L * d);
    for (std::size_t pos = 0; pos < L; ++pos) {
        const float* q = problem.queries.row(h, pos).data();
        const float* k = problem.keys.row(h, pos).data();
        for (std::size_t slot = 0; slot < order.size(); ++slot) {
            rotate_into(&th.qa[pos * d + 2 * slot], q, basis, order[slot], static_cast<std::int64_t>(pos));
            rotate_into(&th.ka[pos * d + 2 * slot], k, basis, order[slot], static_cast<std::int64_t>(pos));
        }
    }
    if (th.segments.empty()) return th;

    th.qb = th.qa;
    th.kb = th.ka;
    if (th.any_clamp) {
        th.qc.assign(L * d, 0.0f);
        th.kc.assign(L * d, 0.0f);
    }
    for (const auto& seg : th.segments) {
        for (std::size_t pos = 0; pos < L; ++pos) {
            const auto p = static_cast<std::int64_t>(pos);
            const float* q = problem.queries.row(h, pos).data();
            const float* k = problem.keys.row(h, pos).data();
            // A query index below zero only arises for m < w, where pass B is never read.
            const std::int64_t qi = std::max<std::int64_t>(seg.rule.query_index(p), 0);
            for (std::size_t off = seg.begin; off < seg.end; off += 2) {
                const int pair = order[off / 2];
                rotate_into(&th.qb[pos * d + off], q, basis, pair, qi);
                rotate_into(&th.kb[pos * d + off], k, basis, pair, seg.rule.key_index(p));
                if (seg.rule.clamp) {
                    rotate_into(&th.qc[pos * d + off], q, basis, pair, seg.rule.e);
                    rotate_into(&th.kc[pos * d + off], k, basis, pair, 0);
                }
            }
        }
    }
    return th;
}

}  // namespace

AttentionOutput attend_tiled(const AttentionProblem& problem, const TiledOptions& options) {
    require(options.tile >= 1, "tile size must be >= 1");
    const PositionLayout layout = problem.validated_layout();
    const auto H = problem.heads();
    const auto L = problem.length();
    const auto d = static_cast<std::size_t>(problem.head_dim());
    const auto T = static_cast<std::size_t>(options.tile);

    AttentionOutput out;
    out.output = Tensor3(H, L, d);
    if (L == 0) return out;

    std::vector<TiledHead> heads;
    heads.reserve(H);
    for (std::size_t h = 0; h < H; ++h) heads.push_back(prepare_head(problem, layout.rules[h], h));

    const double scale = problem.effective_logit_scale();
    const std::size_t query_tiles = (L + T - 1) / T;

    // Work item: one (head, query tile); every item writes a disjoint slab of
    // the output and reduces key tiles in a fixed order.
    parallel_for(H * query_tiles, resolve_workers(options.workers), [&](std::size_t item) {
        const std::size_t h = item / query_tiles;
        const std::size_t m0 = (item % query_tiles) * T;
        const std::size_t m1 = std::min(L, m0 + T);
        const std::size_t rows = m1 - m0;
        const TiledHead& th = heads[h];
        const bool scaled = !th.segments.empty();

        std::vector<double> run_max(rows, -std::numeric_limits<double>::infinity());
        std::vector<double> run_sum(rows, 0.0);
        std::vector<double> acc(rows * d, 0.0);
        std::vector<double> block(T);

        for (std::size_t n0 = 0; n0 < m1; n0 += T) {
            const std::size_t n1 = std::min(m1, n0 + T);
            // Tile-level regime checks; rel ranges over [m0 - (n1-1), (m1-1) - n0].
            const auto rel_lo = static_cast<std::int64_t>(m0) - static_cast<std::int64_t>(n1 - 1);
            const bool all_window = !scaled || static_cast<std::int64_t>(m1 - 1 - n0) <= th.min_window;
            bool all_scaled_unclamped = scaled && rel_lo > th.max_window;
            if (all_scaled_unclamped && th.any_clamp) {
                for (const auto& seg : th.segments) {
                    if (seg.rule.clamp && seg.rule.query_index(static_cast<std::int64_t>(m1 - 1)) -
                                                  seg.rule.key_index(static_cast<std::int64_t>(n0)) >
                                              seg.rule.e) {
                        all_scaled_unclamped = false;
                    }
                }
            }

            for (std::size_t r = 0; r < rows; ++r) {
                const std::size_t m = m0 + r;
                const std::size_t n_end = std::min(n1, m + 1);
                if (n_end <= n0) continue;
                const std::size_t count = n_end - n0;

                if (all_window) {
                    const float* q = &th.qa[m * d];
                    for (std::size_t c = 0; c < count; ++c) block[c] = dot(q, &th.ka[(n0 + c) * d], d);
                } else if (all_scaled_unclamped) {
                    const float* q = &th.qb[m * d];
                    for (std::size_t c = 0; c < count; ++c) block[c] = dot(q, &th.kb[(n0 + c) * d], d);
                } else {
                    for (std::size_t c = 0; c < count; ++c) {
                        const std::size_t n = n0 + c;
                        const auto rel = static_cast<std::int64_t>(m - n);
                        float total = dot(&th.qa[m * d], &th.ka[n * d], th.plain_end);
                        for (const auto& seg : th.segments) {
                            const float* qs;
                            const float* ks;
                            if (rel <= seg.rule.w) {
                                qs = &th.qa[m * d];
                                ks = &th.ka[n * d];
                            } else if (seg.rule.clamp && seg.rule.query_index(static_cast<std::int64_t>(m)) -
                                                                 seg.rule.key_index(static_cast<std::int64_t>(n)) >
                                                             seg.rule.e) {
                                qs = &th.qc[m * d];
                                ks = &th.kc[n * d];
                            } else {
                                qs = &th.qb[m * d];
                                ks = &th.kb[n * d];
                            }
                            total += dot(qs + seg.begin, ks + seg.begin, seg.end - seg.begin);
                        }
                        block[c] = total;
                    }
                }

                double tile_max = -std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < count; ++c) {
                    block[c] *= scale;
                    tile_max = std::max(tile_max, block[c]);
                }
                const double new_max = std::max(run_max[r], tile_max);
                const double correction = std::exp(run_max[r] - new_max);
                double* a = &acc[r * d];
                if (correction != 1.0) {
                    for (std::size_t x = 0; x < d; ++x) a[x] *= correction;
                }
                double tile_sum = 0.0;
                for (std::size_t c = 0; c < count; ++c) {
                    const double p = std::exp(block[c] - new_max);
                    tile_sum += p;
                    const float* v = problem.values.row(h, n0 + c).data();
                    for (std::size_t x = 0; x < d; ++x) a[x] += p * v[x];
                }
                run_sum[r] = run_sum[r] * correction + tile_sum;
                run_max[r] = new_max;
            }
        }

        for (std::size_t r = 0; r < rows; ++r) {
            auto o = out.output.row(h, m0 + r);
            for (std::size_t x = 0; x < d; ++x) o[x] = static_cast<float>(acc[r * d + x] / run_sum[r]);
        }
    });

    std::size_t bytes = 0;
    for (const auto& th : heads) {
        bytes += (th.qa.size() + th.ka.size() + th.qb.size() + th.kb.size() + th.qc.size() + th.kc.size()) * sizeof(float);
    }
    const std::size_t per_item = (2 * T + T * d + T) * sizeof(double);
    bytes += per_item * std::min(resolve_workers(options.workers), H * query_tiles);
    out.workspace_bytes = bytes;
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark

DimensionPlan benchmark_plan(std::int64_t length, std::size_t heads, int head_dim, std::uint64_t seed) {
    static constexpr std::int64_t kScales[8] = {2, 8, 2, 8, 32, 32, 16, 4};
    require(length >= 64, "benchmark lengths must be >= 64");
    require(head_dim % 2 == 0 && head_dim / 2 >= 8, "benchmark head_dim must give at least 8 pairs");
    std::vector<std::int64_t> E;
    for (auto s : kScales) E.push_back(length / s);
    const int pairs = head_dim / 2;
    const int top_k = pairs * 3 / 4;
    std::mt19937_64 rng(derive_seed(seed, "bench-key-dims"));
    std::vector<std::vector<int>> key_dims(heads);
    for (auto& dims : key_dims) {
        std::vector<int> all(static_cast<std::size_t>(pairs));
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        dims.assign(all.begin(), all.begin() + top_k);
    }
    return build_plan(length, length, 8, length / 64, E, key_dims, head_dim, true);
}

namespace {

AttentionProblem random_problem(std::size_t heads, std::size_t length, int head_dim, std::uint64_t seed) {
    AttentionProblem p;
    p.basis = build_basis(head_dim);
    p.queries = Tensor3(heads, length, static_cast<std::size_t>(head_dim));
    p.keys = p.queries;
    p.values = p.queries;
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    for (auto* t : {&p.queries, &p.keys, &p.values}) {
        for (auto& v : t->data()) v = dist(rng);
    }
    return p;
}

template <class Fn>
BenchRow time_engine(const std::string& name, const AttentionProblem& p, int tile, int repeats, Fn&& run) {
    std::vector<double> ms;
    std::size_t peak = 0;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto out = run(p);
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        peak = std::max(peak, out.workspace_bytes + out.output.size() * sizeof(float));
    }
    BenchRow row;
    row.engine = name;
    row.length = static_cast<std::int64_t>(p.length());
    row.heads = p.heads();
    row.head_dim = p.head_dim();
    row.tile = tile;
    row.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    double var = 0.0;
    for (double v : ms) var += (v - row.mean_ms) * (v - row.mean_ms);
    row.std_ms = ms.size() > 1 ? std::sqrt(var / static_cast<double>(ms.size() - 1)) : 0.0;
    row.peak_bytes = peak;
    return row;
}

}  // namespace

std::vector<BenchRow> benchmark(const BenchConfig& config) {
    require(config.repeats >= 1, "repeats must be >= 1");
    require(config.tile >= 1, "tile must be >= 1");
    std::vector<BenchRow> rows;
    for (const auto L : config.lengths) {
        auto problem = random_problem(config.heads, static_cast<std::size_t>(L), config.head_dim,
                                      derive_seed(config.seed, "bench-problem", static_cast<std::uint64_t>(L)));
        const auto plan = benchmark_plan(L, config.heads, config.head_dim, config.seed);
        const TiledOptions topt{config.tile, config.workers};

        problem.positions = PositionMapSpec{};
        rows.push_back(time_engine("standard-tiled", problem, config.tile, config.repeats,
                                   [&](const AttentionProblem& p) { return attend_tiled(p, topt); }));
        problem.positions = plan;
        rows.push_back(time_engine("dpe-tiled", problem, config.tile, config.repeats,
                                   [&](const AttentionProblem& p) { return attend_tiled(p, topt); }));
        if (config.include_exact && L <= ExactOptions{}.max_length) {
            ExactOptions eopt;
            eopt.workers = config.workers;
            rows.push_back(time_engine("dpe-exact", problem, 0, config.repeats,
                                       [&](const AttentionProblem& p) { return attend_exact(p, eopt); }));
        }
    }
    return rows;
}

std::vector<OverheadRow> overhead_summary(const std::vector<BenchRow>& rows) {
    std::vector<OverheadRow> out;
    for (const auto& r : rows) {
        if (r.engine != "standard-tiled") continue;
        for (const auto& o : rows) {
            if (o.engine == "dpe-tiled" && o.length == r.length && o.heads == r.heads && o.head_dim == r.head_dim) {
                out.push_back({r.length, r.mean_ms, o.mean_ms, r.mean_ms > 0 ? o.mean_ms / r.mean_ms : 0.0, r.cv(), o.cv()});
            }
        }
    }
    return out;
}

}  // namespace dpe
