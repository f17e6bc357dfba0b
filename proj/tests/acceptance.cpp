// Acceptance checks AC1..AC10. One line per criterion:
//   AC<n> PASS|FAIL|WARN <detail> [<seconds> s / limit <seconds> s]
// Exit status is non-zero when any criterion fails.

#include "dpe/attention.hpp"
#include "dpe/contribution.hpp"
#include "dpe/detection.hpp"
#include "dpe/fixture.hpp"
#include "dpe/position_maps.hpp"
#include "dpe/rope.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

using namespace dpe;

namespace {

enum class Status { Pass, Fail, Warn };

struct Outcome {
    Status status;
    std::string detail;
};

int failures = 0;

void criterion(const char* id, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.status != Status::Fail && secs > limit_s) {
        out.status = Status::Fail;
        out.detail += " (over time limit)";
    }
    const char* label = out.status == Status::Pass ? "PASS" : out.status == Status::Warn ? "WARN" : "FAIL";
    if (out.status == Status::Fail) ++failures;
    std::printf("%s %s %s [%.2f s / limit %.0f s]\n", id, label, out.detail.c_str(), secs, limit_s);
    std::fflush(stdout);
}

std::string num(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

Outcome pass_if(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

// AC1 -----------------------------------------------------------------------
Outcome rope_composition() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::uniform_int_distribution<std::int64_t> pos(0, 100000);
    const int dims[] = {4, 64, 128};
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = dims[trial % 3];
        const auto basis = build_basis(d, 10000.0);
        std::vector<float> q(static_cast<std::size_t>(d)), k(static_cast<std::size_t>(d));
        for (auto& x : q) x = u(rng);
        for (auto& x : k) x = u(rng);
        const auto m = pos(rng), n = pos(rng);
        const auto rq = rotate(basis, q, m), rk = rotate(basis, k, n);
        double absolute = 0.0;
        for (int i = 0; i < d; ++i) absolute += static_cast<double>(rq.values[static_cast<std::size_t>(i)]) * rk.values[static_cast<std::size_t>(i)];
        // rotate(q,m).rotate(k,n) depends on n - m only
        const double relative = n >= m ? relative_rotation_score(basis, q, k, std::vector<std::int64_t>(static_cast<std::size_t>(d / 2), n - m))
                                       : relative_rotation_score(basis, k, q, std::vector<std::int64_t>(static_cast<std::size_t>(d / 2), m - n));
        worst = std::max(worst, std::fabs(absolute - relative));
    }
    return pass_if(worst < 1e-5, "max |abs - rel| = " + num("%.3g", worst) + " over 1000 draws");
}

AttentionProblem random_problem(std::mt19937_64& rng, std::size_t H, std::size_t L, int d) {
    AttentionProblem p;
    p.queries = oracle::random_tensor(rng, H, L, static_cast<std::size_t>(d));
    p.keys = oracle::random_tensor(rng, H, L, static_cast<std::size_t>(d));
    p.values = oracle::random_tensor(rng, H, L, static_cast<std::size_t>(d));
    p.basis = build_basis(d, 10000.0);
    return p;
}

// AC2 -----------------------------------------------------------------------
Outcome exact_vs_oracle() {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<std::size_t> len(1, 512), heads(1, 2);
    const int dims[] = {4, 8, 16, 32, 64};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = dims[trial % 5];
        auto p = random_problem(rng, heads(rng), trial == 0 ? 512 : len(rng), d);
        const auto got = attend_exact(p, {4096, false, false, 0});
        const auto want = oracle::absolute_rope_attention(p.queries, p.keys, p.values, oracle::thetas_of(p.basis),
                                                          1.0L / std::sqrt(static_cast<long double>(d)));
        long double scale = 0, err = 0;
        for (std::size_t i = 0; i < want.size(); ++i) {
            scale = std::max(scale, std::fabs(want[i]));
            err = std::max(err, std::fabs(static_cast<long double>(got.output.data()[i]) - want[i]));
        }
        worst = std::max(worst, static_cast<double>(err / std::max<long double>(scale, 1e-30L)));
    }
    return pass_if(worst < 1e-5, "max relative error " + num("%.3g", worst) + " over 100 problems");
}

// AC3 -----------------------------------------------------------------------
PositionLayout random_layout(std::mt19937_64& rng, std::size_t H, std::int64_t L, int d) {
    const int pairs = d / 2;
    std::uniform_int_distribution<int> kind(0, 9);
    const int k = kind(rng);
    if (k == 0) return PositionLayout::uniform(H, pairs, PositionMapSpec{maps::ReRope{std::max<std::int64_t>(1, L / 8)}});
    if (k == 1) return PositionLayout::uniform(H, pairs, PositionMapSpec{maps::SelfExtend{std::max<std::int64_t>(1, L / 16), 4}});
    // DPE plan with random scale sizes, window, key sets and clamp
    const int C = pairs % 4 == 0 ? 4 : 2;
    const std::int64_t w = std::uniform_int_distribution<std::int64_t>(0, std::max<std::int64_t>(1, L / 8))(rng);
    const std::int64_t target = std::max<std::int64_t>(L, 4 * (w + 1));
    std::vector<std::int64_t> E;
    const std::int64_t S[] = {1, 2, 3, 8, 16, 32};
    for (int i = 0; i < C; ++i) {
        const auto s = S[std::uniform_int_distribution<int>(0, 5)(rng)];
        E.push_back(std::max(w + 1, target / s));
    }
    const int top = std::uniform_int_distribution<int>(0, pairs)(rng);
    std::vector<std::vector<int>> key_dims(H);
    for (auto& dims : key_dims) {
        std::vector<int> all(static_cast<std::size_t>(pairs));
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        dims.assign(all.begin(), all.begin() + top);
    }
    const auto plan = build_plan(std::max<std::int64_t>(1, target / 4), target, C, w, E, key_dims, d, kind(rng) % 2 == 0);
    return PositionLayout::from_plan(plan, true);
}

Outcome tiled_vs_exact() {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<std::size_t> len(1, 2048);
    const int dims[] = {16, 32, 64};
    const int tiles[] = {16, 64, 128, 100};
    float worst = 0.0f;
    int mismatched_workers = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = dims[trial % 3];
        const std::size_t L = trial < 2 ? 2048 : len(rng);
        auto p = random_problem(rng, 1 + trial % 2, L, d);
        p.positions = random_layout(rng, p.heads(), static_cast<std::int64_t>(L), d);
        const auto exact = attend_exact(p, {4096, true, false, 0});
        const auto t1 = attend_tiled(p, {tiles[trial % 4], 1});
        const auto t4 = attend_tiled(p, {tiles[trial % 4], 4});
        worst = std::max(worst, oracle::max_abs_diff(exact.output, t1.output));
        mismatched_workers += !(t1.output == t4.output);
    }
    return pass_if(worst < 1e-3f && mismatched_workers == 0,
                   "max |tiled - exact| = " + num("%.3g", worst) + ", worker-count mismatches " +
                       std::to_string(mismatched_workers) + "/100");
}

// AC4 -----------------------------------------------------------------------
Outcome separability_bound() {
    std::int64_t worst = 0;
    for (std::int64_t s : {2, 8, 16, 32}) {
        for (std::int64_t w : {0, 16, 1024}) {
            const SeparableRule rule{s, w, 0, false};
            for (std::int64_t m = 0; m < 4096; ++m) {
                for (std::int64_t n = 0; n <= m; ++n) {
                    worst = std::max(worst, std::abs(rule(m, n) - map_dpe(m - n, s, w, 0, false)));
                }
            }
        }
    }
    return pass_if(worst <= 1, "max deviation " + std::to_string(worst) + " over all m,n < 4096");
}

// AC5 -----------------------------------------------------------------------
Outcome plan_reproduction() {
    const std::vector<std::int64_t> E{65536, 16384, 65536, 16384, 4096, 4096, 8192, 32768};
    const std::vector<std::int64_t> S{2, 8, 2, 8, 32, 32, 16, 4};
    std::vector<int> all(64);
    for (int j = 0; j < 64; ++j) all[static_cast<std::size_t>(j)] = j;
    const auto plan = build_plan(8192, 131072, 8, 1024, E, {all});
    bool within = true;
    for (int g = 0; g < 8; ++g) {
        const auto map = plan.map_for(0, plan.groups[static_cast<std::size_t>(g)].begin);
        for (std::int64_t r = 0; r < 131072; ++r) within = within && map(r) <= E[static_cast<std::size_t>(g)];
    }
    return pass_if(plan.scale_sizes == S && within,
                   std::string("S ") + (plan.scale_sizes == S ? "= " : "!= ") + "[2,8,2,8,32,32,16,4]; clamp " +
                       (within ? "holds" : "violated") + " for rel < 131072");
}

// AC6 -----------------------------------------------------------------------
Outcome planted_recovery() {
    SweepConfig c;
    c.detect_grid = SweepConfig::power_grid(1024, 131072);
    std::mt19937_64 rng(606);
    int wrong = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int64_t> tau;
        for (int i = 0; i < 8; ++i) {
            tau.push_back(c.detect_grid[std::uniform_int_distribution<std::size_t>(0, c.detect_grid.size() - 1)(rng)]);
        }
        if (trial == 0) tau.assign(8, 131072);  // every row all ties
        PlantedEvaluator ev(tau, 0.0, static_cast<std::uint64_t>(trial));
        c.seed = static_cast<std::uint64_t>(trial);
        const auto r = run_sweep(c, ev);
        wrong += r.effective_lengths != tau;
    }
    return pass_if(wrong == 0, "E == tau in " + std::to_string(50 - wrong) + "/50 sweeps of 8 groups x 8 lengths");
}

// AC7 -----------------------------------------------------------------------
Outcome topk_oracle() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> u(0.0, 10.0), factor(0.01, 100.0);
    int mismatch = 0, not_invariant = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        NormProfile p;
        p.heads = 1 + static_cast<std::size_t>(trial % 4);
        p.pairs = 64;
        p.sample_count = 1;
        for (std::size_t i = 0; i < p.heads * 64; ++i) {
            // a third of the draws repeat an earlier score to force ties
            p.scores.push_back(i > 0 && rng() % 3 == 0 ? p.scores[rng() % i] : u(rng));
        }
        const int k = static_cast<int>(rng() % 65);
        const auto got = select_key_dims(p, k);
        auto scaled = p;
        for (std::size_t h = 0; h < p.heads; ++h) {
            const double f = factor(rng);
            for (int j = 0; j < 64; ++j) scaled.scores[h * 64 + static_cast<std::size_t>(j)] *= f;
            std::vector<double> row(p.scores.begin() + static_cast<long>(h * 64), p.scores.begin() + static_cast<long>(h * 64 + 64));
            mismatch += got[h] != oracle::top_k(row, k);
        }
        not_invariant += select_key_dims(scaled, k) != got;
    }
    return pass_if(mismatch == 0 && not_invariant == 0,
                   std::to_string(mismatch) + " oracle mismatches, " + std::to_string(not_invariant) +
                       " rescaling changes over 1000 profiles");
}

// AC8 -----------------------------------------------------------------------
// Incremental oracles: walk rel upward and count steps instead of dividing.
Outcome baseline_maps() {
    const std::int64_t R = std::int64_t{1} << 17;
    std::int64_t bad = 0;
    {  // ReRoPE, w = 2048
        for (std::int64_t r = 0; r <= R; ++r) bad += map_rerope(r, 2048) != (r < 2048 ? r : 2048);
    }
    {  // Self-Extend, w = 1024, g = 32
        std::int64_t value = 0, since = 0;
        for (std::int64_t r = 0; r <= R; ++r) {
            if (r <= 1024) {
                value = r;
            } else if (++since == 32) {
                since = 0;
                ++value;
            }
            bad += map_self_extend(r, 1024, 32) != value;
        }
    }
    for (std::int64_t t : SweepConfig::power_grid(1024, 131072)) {  // detection, w = 1024, L = 131072
        std::int64_t value = 0, acc = 0;
        for (std::int64_t r = 0; r <= R; ++r) {
            if (r <= 1024) {
                value = r;
            } else {
                acc += t;
                while (acc >= 131072) {
                    acc -= 131072;
                    ++value;
                }
            }
            bad += map_detection(r, t, 1024, 131072) != value;
        }
        bad += map_detection(4096 + 1024, t, 1024, 131072) != oracle::detection(4096 + 1024, t, 1024, 131072);
    }
    return pass_if(bad == 0, std::to_string(bad) + " disagreements over rel <= 2^17 (ReRoPE 2048, Self-Extend 1024/32, detection 1k..128k)");
}

// AC9 -----------------------------------------------------------------------
Outcome fixture_smoke() {
    const auto model = build_fixture_model(FixtureSpec{});
    FixtureEvalConfig at_train;
    at_train.target_length = at_train.train_length;
    const auto control = evaluate_methods(model, at_train, {"standard"});
    FixtureEvalConfig extended;
    extended.target_length = 4 * extended.train_length;
    const auto rows = evaluate_methods(model, extended, {"standard", "dpe"});
    const double std_train = control[0].accuracy(), std_long = rows[0].accuracy(), dpe_long = rows[1].accuracy();
    return pass_if(std_train >= 0.9 && dpe_long >= std_long,
                   "standard@L_train " + num("%.3f", std_train) + ", standard@4x " + num("%.3f", std_long) +
                       ", dpe@4x " + num("%.3f", dpe_long));
}

// AC10 ----------------------------------------------------------------------
Outcome overhead() {
    BenchConfig c;
    c.lengths = {8192};
    c.heads = 1;
    c.head_dim = 128;
    c.repeats = 3;
    c.seed = 10;
    const auto summary = overhead_summary(benchmark(c));
    const auto& r = summary.at(0);
    const std::string detail = "dpe/standard = " + num("%.3f", r.ratio) + " (" + num("%.0f", r.dpe_ms) + " ms vs " +
                               num("%.0f", r.standard_ms) + " ms, cv " + num("%.3f", r.cv_standard) + "/" +
                               num("%.3f", r.cv_dpe) + ")";
    if (r.ratio <= 1.5) return {Status::Pass, detail};
    if (r.ratio <= 2.0) return {Status::Warn, detail + " above 1.5, below the 2x hard limit"};
    return {Status::Fail, detail};
}

}  // namespace

int main() {
    criterion("AC1", 5, rope_composition);
    criterion("AC2", 60, exact_vs_oracle);
    criterion("AC3", 300, tiled_vs_exact);
    criterion("AC4", 120, separability_bound);
    criterion("AC5", 1, plan_reproduction);
    criterion("AC6", 30, planted_recovery);
    criterion("AC7", 10, topk_oracle);
    criterion("AC8", 120, baseline_maps);
    criterion("AC9", 300, fixture_smoke);
    criterion("AC10", 300, overhead);
    return failures == 0 ? 0 : 1;
}
