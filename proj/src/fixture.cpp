#include "dpe/fixture.hpp"

#include "dpe/contribution.hpp"
#include "dpe/error.hpp"
#include "dpe/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace dpe {

namespace {

double fixture_base(const FixtureSpec& spec) {
    const int pairs = spec.head_dim / 2;
    const int first_content = pairs - spec.content_pairs;
    // theta_first_content * train_length == content_angle
    return std::pow(static_cast<double>(spec.train_length) / spec.content_angle,
                    static_cast<double>(spec.head_dim) / (2.0 * first_content));
}

const FixtureSpec& checked(const FixtureSpec& spec) {
    require(spec.head_dim >= 4 && spec.head_dim % 2 == 0, "fixture head_dim must be even and >= 4");
    const int cd = 2 * spec.content_pairs;
    require(spec.content_pairs >= 1 && spec.content_pairs < spec.head_dim / 2,
            "fixture content pairs must leave at least one positional pair");
    require((cd & (cd - 1)) == 0, "fixture content width must be a power of two");
    require(spec.vocab.needle_keys <= cd, "fixture has more needle keys than orthogonal codes");
    require(spec.vocab.filler >= 2, "fixture filler vocabulary too small");
    require(spec.needles >= 0 && spec.needles <= spec.vocab.needle_keys, "fixture needle count out of range");
    require(spec.train_length > 1 && spec.content_angle > 0.0 &&
                static_cast<double>(spec.train_length) > spec.content_angle,
            "fixture train length must exceed the content angle");
    require(spec.prev_gain > 0.0 && spec.match_gain > 0.0, "fixture gains must be positive");
    return spec;
}

Tensor3 project(const std::vector<float>& x, std::size_t length, std::size_t width, const std::vector<float>& w,
                std::size_t out) {
    Tensor3 t(1, length, out);
    for (std::size_t p = 0; p < length; ++p) {
        auto row = t.row(0, p);
        const float* xp = &x[p * width];
        for (std::size_t i = 0; i < width; ++i) {
            if (xp[i] == 0.0f) continue;
            const float* wi = &w[i * out];
            for (std::size_t o = 0; o < out; ++o) row[o] += xp[i] * wi[o];
        }
    }
    return t;
}

PositionLayout single_head(const PositionLayout& layout, std::size_t head) {
    PositionLayout out;
    out.rules.push_back(layout.rules.at(head));
    return out;
}

}  // namespace

FixtureModel::FixtureModel(const FixtureSpec& spec) : spec_(checked(spec)), basis_(spec.head_dim, fixture_base(spec)) {
    const auto hd = static_cast<std::size_t>(spec_.head_dim);
    const auto cd = static_cast<std::size_t>(2 * spec_.content_pairs);
    const auto P = static_cast<std::size_t>(basis_.pairs());
    const std::size_t first_content = P - static_cast<std::size_t>(spec_.content_pairs);
    const std::size_t kOne = hd, kCode = hd + 1, kPrev = hd + 1 + cd;
    width_ = hd + 1 + 2 * cd;

    // Token embeddings: random unit vectors in the first hd slots, a constant
    // channel, and a Hadamard code for needle keys.
    const auto V = static_cast<std::size_t>(spec_.vocab.size());
    embed_.assign(V * width_, 0.0f);
    std::mt19937_64 rng(derive_seed(spec_.seed, "fixture-embed"));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t v = 0; v < V; ++v) {
        std::vector<double> e(hd);
        double norm = 0.0;
        for (auto& x : e) {
            x = normal(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < hd; ++i) embed_[v * width_ + i] = static_cast<float>(e[i] / norm);
        embed_[v * width_ + kOne] = 1.0f;
    }
    const double code_scale = 1.0 / std::sqrt(static_cast<double>(cd));
    for (int key = 0; key < spec_.vocab.needle_keys; ++key) {
        const auto v = static_cast<std::size_t>(spec_.vocab.filler + key);
        for (std::size_t c = 0; c < cd; ++c) {
            const int sign = (std::popcount(static_cast<unsigned>(key) & static_cast<unsigned>(c)) % 2) ? -1 : 1;
            embed_[v * width_ + kCode + c] = static_cast<float>(sign * code_scale);
        }
    }

    wq1_.assign(width_ * hd, 0.0f);
    wk1_.assign(width_ * hd, 0.0f);
    wv1_.assign(width_ * hd, 0.0f);
    wo1_.assign(hd * width_, 0.0f);
    wq2_.assign(width_ * hd, 0.0f);
    wk2_.assign(width_ * hd, 0.0f);
    wv2_.assign(width_ * hd, 0.0f);
    for (std::size_t j = 0; j < P; ++j) {
        // k^T R(theta rel) q = cos(theta (rel - 1)) for k = (1, 0), q = R(-theta)(1, 0).
        const double theta = basis_.theta(static_cast<int>(j));
        wq1_[kOne * hd + 2 * j] = static_cast<float>(std::cos(theta));
        wq1_[kOne * hd + 2 * j + 1] = static_cast<float>(-std::sin(theta));
        wk1_[kOne * hd + 2 * j] = 1.0f;
    }
    for (std::size_t c = 0; c < cd; ++c) {
        wv1_[(kCode + c) * hd + c] = 1.0f;
        wo1_[c * width_ + kPrev + c] = 1.0f;
        wq2_[(kCode + c) * hd + 2 * first_content + c] = 1.0f;
        wk2_[(kPrev + c) * hd + 2 * first_content + c] = 1.0f;
    }
    for (std::size_t i = 0; i < hd; ++i) wv2_[i * hd + i] = 1.0f;
}

FixtureModel build_fixture_model(const FixtureSpec& spec) { return FixtureModel(spec); }

FixtureRun FixtureModel::standard_run() const {
    return {PositionLayout::uniform(kHeads, pairs(), PositionMapSpec{}), NoScaling{}};
}

SyntheticNiahTask FixtureModel::sample_task(std::int64_t length, std::uint64_t seed, std::size_t index) const {
    return generate_niah(length, spec_.needles, derive_seed(seed, "fixture-task", index), spec_.vocab);
}

FixtureModel::Pass FixtureModel::forward(const SyntheticNiahTask& task, const FixtureRun& run) const {
    require(run.layout.heads() == kHeads, "fixture runs need a two-head layout (one per layer)");
    const auto L = task.tokens.size();
    const auto hd = static_cast<std::size_t>(spec_.head_dim);
    const FrequencyBasis basis(spec_.head_dim, basis_.base(), run.scaling);

    std::vector<float> x(L * width_);
    for (std::size_t p = 0; p < L; ++p) {
        const auto tok = static_cast<std::size_t>(task.tokens[p]);
        require(tok < static_cast<std::size_t>(spec_.vocab.size()), "token outside the fixture vocabulary");
        std::copy_n(&embed_[tok * width_], width_, &x[p * width_]);
    }

    ExactOptions exact;
    exact.workers = 1;
    exact.max_length = std::max<std::int64_t>(exact.max_length, static_cast<std::int64_t>(L));

    AttentionProblem first;
    first.basis = basis;
    first.queries = project(x, L, width_, wq1_, hd);
    first.keys = project(x, L, width_, wk1_, hd);
    first.values = project(x, L, width_, wv1_, hd);
    first.positions = single_head(run.layout, 0);
    first.logit_scale = spec_.prev_gain / basis.pairs() * basis.logit_temperature();
    const auto a1 = attend_exact(first, exact);

    for (std::size_t p = 0; p < L; ++p) {
        const auto a = a1.output.row(0, p);
        for (std::size_t i = 0; i < hd; ++i) {
            if (a[i] == 0.0f) continue;
            for (std::size_t o = 0; o < width_; ++o) x[p * width_ + o] += a[i] * wo1_[i * width_ + o];
        }
    }

    AttentionProblem second;
    second.basis = basis;
    second.queries = project(x, L, width_, wq2_, hd);
    second.keys = project(x, L, width_, wk2_, hd);
    second.values = project(x, L, width_, wv2_, hd);
    second.positions = single_head(run.layout, 1);
    second.logit_scale = spec_.match_gain * basis.logit_temperature();
    const auto a2 = attend_exact(second, exact);

    Pass pass;
    for (auto pos : task.query_positions) {
        const auto out = a2.output.row(0, static_cast<std::size_t>(pos));
        int best = 0;
        double best_score = -1e300;
        for (int v = 0; v < spec_.vocab.filler; ++v) {
            double s = 0.0;
            for (std::size_t i = 0; i < hd; ++i) s += out[i] * embed_[static_cast<std::size_t>(v) * width_ + i];
            if (s > best_score) {
                best_score = s;
                best = v;
            }
        }
        pass.predictions.push_back(best);
    }

    pass.activations.queries = Tensor3(kHeads, L, hd);
    pass.activations.keys = Tensor3(kHeads, L, hd);
    for (std::size_t p = 0; p < L; ++p) {
        std::copy_n(first.queries.row(0, p).data(), hd, pass.activations.queries.row(0, p).data());
        std::copy_n(first.keys.row(0, p).data(), hd, pass.activations.keys.row(0, p).data());
        std::copy_n(second.queries.row(0, p).data(), hd, pass.activations.queries.row(1, p).data());
        std::copy_n(second.keys.row(0, p).data(), hd, pass.activations.keys.row(1, p).data());
    }
    return pass;
}

std::vector<int> FixtureModel::predict(const SyntheticNiahTask& task, const FixtureRun& run) const {
    return forward(task, run).predictions;
}

std::optional<double> FixtureModel::accuracy(const SyntheticNiahTask& task, const FixtureRun& run) const {
    if (task.needles.empty()) return std::nullopt;
    return niah_accuracy(task, predict(task, run));
}

FixtureModel::Activations FixtureModel::capture(const SyntheticNiahTask& task) const {
    return forward(task, standard_run()).activations;
}

double FixtureEvaluator::evaluate(const CellRequest& cell) const {
    require(!cell.groups.empty() && cell.groups.back().end == model_.pairs(),
            "cell groups do not cover the fixture's frequency pairs");
    const FixtureRun run{PositionLayout::per_group(FixtureModel::kHeads, cell.groups, cell.group_maps), NoScaling{}};
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t s = 0; s < cell.samples; ++s) {
        const auto task = model_.sample_task(cell.context_length, cell.seed, s);
        if (const auto acc = model_.accuracy(task, run)) {
            total += *acc;
            ++counted;
        }
    }
    return counted ? total / static_cast<double>(counted) : 0.0;
}

// ---------------------------------------------------------------------------
// Baseline comparison

const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> methods = {"standard", "rerope", "self_extend", "ntk_dynamic", "yarn", "dpe"};
    return methods;
}

DetectionReport detect_fixture_lengths(const FixtureModel& model, const FixtureEvalConfig& config) {
    const auto w = config.resolved_window();
    std::int64_t lo = 1;
    while (lo <= w) lo *= 2;
    SweepConfig sweep;
    sweep.head_dim = model.spec().head_dim;
    sweep.num_groups = config.num_groups;
    sweep.detect_grid = SweepConfig::power_grid(lo, config.target_length);
    sweep.window = w;
    sweep.train_length = config.train_length;
    sweep.baseline_length = std::max<std::int64_t>(1, config.train_length / 2);
    sweep.context_length = config.target_length;
    sweep.samples = config.detect_samples;
    sweep.seed = derive_seed(config.seed, "fixture-detect");
    sweep.workers = config.workers;
    return run_sweep(sweep, FixtureEvaluator(model));
}

DimensionPlan fixture_dpe_plan(const FixtureModel& model, const FixtureEvalConfig& config) {
    auto E = config.effective_lengths;
    if (E.empty()) E = detect_fixture_lengths(model, config).effective_lengths;
    const auto task = model.sample_task(config.target_length, derive_seed(config.seed, "norm-capture"), 0);
    const auto acts = model.capture(task);
    const auto profile = collect_norms(acts.queries, acts.keys);
    const int top_k = config.top_k.value_or(model.pairs() * 3 / 4);
    return build_plan(config.train_length, config.target_length, config.num_groups, config.resolved_window(), E,
                      select_key_dims(profile, top_k), model.spec().head_dim, true);
}

FixtureRun method_run(const FixtureModel& model, const std::string& method, const FixtureEvalConfig& config) {
    const double ratio = static_cast<double>(config.target_length) / static_cast<double>(config.train_length);
    const auto uniform = [&](const PositionMapSpec& spec) {
        return PositionLayout::uniform(FixtureModel::kHeads, model.pairs(), spec);
    };
    if (method == "standard") return model.standard_run();
    if (method == "rerope") {
        return {uniform(PositionMapSpec(maps::ReRope{config.rerope_window.value_or(config.train_length / 4)})), NoScaling{}};
    }
    if (method == "self_extend") {
        const auto w = config.self_extend_window.value_or(config.train_length / 8);
        const auto g = config.self_extend_group.value_or(
            std::max<std::int64_t>(1, 2 * config.target_length / config.train_length));
        return {uniform(PositionMapSpec(maps::SelfExtend{w, g})), NoScaling{}};
    }
    if (method == "ntk_dynamic") {
        return {uniform(PositionMapSpec{}), NtkDynamic{config.ntk_factor.value_or(std::max(1.0, ratio))}};
    }
    if (method == "yarn") {
        YarnByParts yarn{config.yarn_beta_fast, config.yarn_beta_slow, config.yarn_scale.value_or(std::max(1.0, ratio)),
                         config.yarn_attn_factor, config.train_length};
        return {uniform(PositionMapSpec{}), yarn};
    }
    if (method == "dpe") return {PositionLayout::from_plan(fixture_dpe_plan(model, config)), NoScaling{}};
    fail("unknown method '" + method + "'");
}

std::vector<MethodResult> evaluate_methods(const FixtureModel& model, const FixtureEvalConfig& config,
                                           const std::vector<std::string>& methods) {
    require(config.samples >= 1, "evaluation needs at least one sample");
    for (const auto& m : methods) {
        require(std::find(known_methods().begin(), known_methods().end(), m) != known_methods().end(),
                "unknown method '" + m + "'");
    }
    const std::size_t workers = config.workers == 0 ? default_workers() : config.workers;
    std::vector<MethodResult> out;
    for (const auto& method : methods) {
        const auto run = method_run(model, method, config);
        std::vector<std::size_t> hits(config.samples, 0), totals(config.samples, 0);
        parallel_for(config.samples, workers, [&](std::size_t s) {
            const auto task = model.sample_task(config.target_length, derive_seed(config.seed, "eval"), s);
            const auto pred = model.predict(task, run);
            for (std::size_t i = 0; i < pred.size(); ++i) hits[s] += pred[i] == task.needles[i].value;
            totals[s] = pred.size();
        });
        MethodResult r;
        r.method = method;
        r.context_length = config.target_length;
        for (std::size_t s = 0; s < config.samples; ++s) {
            r.correct += hits[s];
            r.total += totals[s];
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace dpe
