// dpe: command-line front end for planning, detection, norm analysis,
// fixture evaluation and benchmarking.

#include "dpe/attention.hpp"
#include "dpe/contribution.hpp"
#include "dpe/detection.hpp"
#include "dpe/error.hpp"
#include "dpe/fixture.hpp"
#include "dpe/io.hpp"
#include "dpe/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
};

dpe::RunConfig resolve(const Common& c) {
    dpe::RunConfig cfg = c.config_path.empty() ? dpe::RunConfig{} : dpe::load_config(c.config_path);
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.evaluator.seed = *c.seed;
    }
    if (!c.out.empty()) cfg.output_dir = c.out;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const dpe::RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    return dir;
}

void emit(const fs::path& path, const std::string& text) {
    dpe::write_text(path, text);
    std::cerr << "wrote " << path.string() << '\n';
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------

struct PlanArgs {
    std::string queries, keys, report;
    bool no_clamp = false;
};

int cmd_plan(const Common& common, const PlanArgs& args) {
    auto cfg = resolve(common);
    const int pairs = cfg.head_dim / 2;

    std::vector<std::int64_t> E = cfg.effective_lengths;
    if (!args.report.empty()) {
        const auto report = dpe::report_from_json(nlohmann::json::parse(dpe::read_text(args.report)));
        E = report.effective_lengths;
    }
    dpe::require(!E.empty(), "no effective lengths: set effective_lengths in the config or pass --report");

    std::vector<std::vector<int>> key_dims;
    if (!args.queries.empty() || !args.keys.empty()) {
        dpe::require(!args.queries.empty() && !args.keys.empty(), "--queries and --keys go together");
        const auto q = dpe::to_tensor3(dpe::read_tensor(args.queries));
        const auto k = dpe::to_tensor3(dpe::read_tensor(args.keys));
        dpe::require(static_cast<int>(q.width()) == cfg.head_dim, "activation width does not match head_dim");
        key_dims = dpe::select_key_dims(dpe::collect_norms(q, k), cfg.top_k);
    } else {
        dpe::warn("no activations given; key dimensions default to the lowest " + std::to_string(cfg.top_k) +
                  " pair indices");
        std::vector<int> lowest;
        for (int j = 0; j < std::min(cfg.top_k, pairs); ++j) lowest.push_back(j);
        key_dims.assign(cfg.heads, lowest);
    }

    const auto plan = dpe::build_plan(cfg.train_length, cfg.target_length, cfg.num_groups, cfg.window, E, key_dims,
                                      cfg.head_dim, !args.no_clamp);
    for (const auto& w : plan.warnings) dpe::warn(w);
    const std::string text = plan_to_json(plan).dump(2) + "\n";
    emit(out_dir(cfg) / "plan.json", text);
    std::cout << text;
    return 0;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
    bool stamp = false;
};

int cmd_detect(const Common& common, const DetectArgs& args) {
    auto cfg = resolve(common);
    auto sweep = dpe::sweep_config(cfg);
    if (cfg.evaluator.id == "fixture") {
        // The fixture works at its own scale.
        sweep.head_dim = dpe::FixtureSpec{}.head_dim;
    }
    sweep.validate();
    auto spec = cfg.evaluator;
    spec.seed = cfg.seed;
    const auto evaluator = dpe::make_evaluator(spec);
    auto report = dpe::run_sweep(sweep, *evaluator);
    if (args.stamp) report.metadata.generated_at = utc_now();

    const auto dir = out_dir(cfg);
    const std::string json = dpe::report_to_json(report).dump(2) + "\n";
    const std::string csv = dpe::detection_csv(report);
    emit(dir / "detection.json", json);
    emit(dir / "detection.csv", csv);
    emit(dir / "detection.svg", dpe::detection_svg(report));
    std::cout << (common.format == "json" ? json : csv);
    return 0;
}

// ---------------------------------------------------------------------------

struct NormArgs {
    std::string queries, keys;
    bool joint = false;
    bool from_fixture = false;
};

int cmd_norms(const Common& common, const NormArgs& args) {
    auto cfg = resolve(common);
    const auto dir = out_dir(cfg);
    dpe::Tensor3 q, k;
    if (args.from_fixture) {
        dpe::FixtureSpec fs;
        fs.train_length = cfg.fixture.train_length;
        const auto model = dpe::build_fixture_model(fs);
        const auto task = model.sample_task(cfg.fixture.target_length, dpe::derive_seed(cfg.seed, "norms"), 0);
        auto acts = model.capture(task);
        q = std::move(acts.queries);
        k = std::move(acts.keys);
        dpe::write_tensor(dir / "queries.dpet", dpe::to_tensor_data(q));
        dpe::write_tensor(dir / "keys.dpet", dpe::to_tensor_data(k));
    } else {
        dpe::require(!args.queries.empty() && !args.keys.empty(), "analyze-norms needs --queries and --keys");
        q = dpe::to_tensor3(dpe::read_tensor(args.queries));
        k = dpe::to_tensor3(dpe::read_tensor(args.keys));
    }
    const auto profile =
        dpe::collect_norms(q, k, args.joint ? dpe::NormAveraging::Joint : dpe::NormAveraging::Factored);
    const std::string csv = dpe::norms_csv(profile);
    emit(dir / "norms.csv", csv);
    emit(dir / "norms.svg", dpe::norms_svg(profile));
    if (common.format == "json") {
        nlohmann::json j = {{"heads", profile.heads},
                            {"pairs", profile.pairs},
                            {"averaging", args.joint ? "joint" : "factored"},
                            {"scores", profile.scores},
                            {"key_dims", dpe::select_key_dims(profile, std::min(cfg.top_k, profile.pairs))}};
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << csv;
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::vector<std::string> methods;
};

int cmd_eval(const Common& common, const EvalArgs& args) {
    auto cfg = resolve(common);
    std::vector<std::string> methods = args.methods.empty() ? cfg.fixture.methods : args.methods;
    if (methods.empty()) {
        methods = {"standard"};
        if (cfg.baseline != "standard") methods.push_back(cfg.baseline);
    }
    dpe::FixtureSpec fs;
    fs.train_length = cfg.fixture.train_length;
    const auto model = dpe::build_fixture_model(fs);
    auto ec = dpe::fixture_eval_config(cfg);
    const auto rows = dpe::evaluate_methods(model, ec, methods);
    const std::string csv = dpe::eval_csv(rows);
    emit(out_dir(cfg) / "eval.csv", csv);
    if (common.format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) {
            j.push_back({{"method", r.method},
                         {"context_length", r.context_length},
                         {"correct", r.correct},
                         {"total", r.total},
                         {"accuracy", r.accuracy()}});
        }
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << csv;
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::vector<std::int64_t> lengths{1024, 2048, 4096};
    std::size_t heads = 8;
    int head_dim = 128;
    int repeats = 3;
    int tile = 128;
    bool exact = false;
};

int cmd_bench(const Common& common, const BenchArgs& args) {
    auto cfg = resolve(common);
    dpe::BenchConfig bc;
    bc.lengths = args.lengths;
    bc.heads = args.heads;
    bc.head_dim = args.head_dim;
    bc.repeats = args.repeats;
    bc.tile = args.tile;
    bc.include_exact = args.exact;
    bc.seed = cfg.seed;
    const auto rows = dpe::benchmark(bc);
    const auto summary = dpe::overhead_summary(rows);
    const auto dir = out_dir(cfg);
    const std::string csv = dpe::bench_csv(rows);
    emit(dir / "bench.csv", csv);
    emit(dir / "overhead.csv", dpe::overhead_csv(summary));
    std::cout << csv;
    for (const auto& r : summary) {
        std::cerr << "L=" << r.length << " dpe/standard = " << r.ratio << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dimension-wise positional embedding toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(dpe::kLibraryVersion));

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "root seed (overrides the config)");
        sub->add_option("--out", common.out, "output directory (overrides the config)");
        sub->add_option("--format", common.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
    };

    PlanArgs plan_args;
    auto* plan = app.add_subcommand("plan", "build a dimension plan");
    add_common(plan);
    plan->add_option("--queries", plan_args.queries, "DPET1 query activations (H x L x d)");
    plan->add_option("--keys", plan_args.keys, "DPET1 key activations (H x L x d)");
    plan->add_option("--report", plan_args.report, "detection report JSON supplying E");
    plan->add_flag("--no-clamp", plan_args.no_clamp, "leave scaled indices unclamped");

    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "run an effective-length detection sweep");
    add_common(detect);
    detect->add_flag("--stamp", detect_args.stamp, "record a generation timestamp in the report");

    NormArgs norm_args;
    auto* norms = app.add_subcommand("analyze-norms", "per-pair 2-norm contribution profile");
    add_common(norms);
    norms->add_option("--queries", norm_args.queries, "DPET1 query activations");
    norms->add_option("--keys", norm_args.keys, "DPET1 key activations");
    norms->add_flag("--joint", norm_args.joint, "average |q||k| per position instead of the factored form");
    norms->add_flag("--from-fixture", norm_args.from_fixture, "capture activations from the induction fixture");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "compare position maps on the fixture NIAH task");
    add_common(eval);
    eval->add_option("--methods", eval_args.methods, "methods to compare")->delimiter(',');

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "time standard and DPE tiled attention");
    add_common(bench);
    bench->add_option("--lengths", bench_args.lengths, "sequence lengths")->delimiter(',');
    bench->add_option("--heads", bench_args.heads);
    bench->add_option("--head-dim", bench_args.head_dim);
    bench->add_option("--repeats", bench_args.repeats);
    bench->add_option("--tile", bench_args.tile);
    bench->add_flag("--exact", bench_args.exact, "also time the exact engine");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (plan->parsed()) return cmd_plan(common, plan_args);
        if (detect->parsed()) return cmd_detect(common, detect_args);
        if (norms->parsed()) return cmd_norms(common, norm_args);
        if (eval->parsed()) return cmd_eval(common, eval_args);
        if (bench->parsed()) return cmd_bench(common, bench_args);
    } catch (const dpe::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const dpe::FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
