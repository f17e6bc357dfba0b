#include "dpe/detection.hpp"

#include "dpe/error.hpp"
#include "dpe/fixture.hpp"
#include "dpe/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dpe {

void SweepConfig::validate() const {
    require(num_groups >= 1, "num_groups must be >= 1");
    require(head_dim >= 2 && head_dim % 2 == 0, "head_dim must be even");
    require(!detect_grid.empty(), "detection grid must not be empty");
    for (std::size_t i = 0; i < detect_grid.size(); ++i) {
        require(detect_grid[i] >= 1, "detecting lengths must be >= 1");
        if (i > 0) require(detect_grid[i] > detect_grid[i - 1], "detection grid must be strictly increasing");
    }
    require(window >= 0, "window must be >= 0");
    require(baseline_length >= 1 && baseline_length <= train_length, "baseline length must lie in [1, train length]");
    require(context_length > window, "context length must exceed the window");
    require(samples >= 1, "samples per cell must be >= 1");
}

std::vector<std::int64_t> SweepConfig::power_grid(std::int64_t lo, std::int64_t hi) {
    require(lo >= 1 && hi >= lo, "power grid needs 1 <= lo <= hi");
    std::vector<std::int64_t> out;
    for (std::int64_t t = lo; t <= hi; t *= 2) out.push_back(t);
    return out;
}

// ---------------------------------------------------------------------------

PlantedEvaluator::PlantedEvaluator(std::vector<std::int64_t> thresholds, double noise, std::uint64_t seed)
    : thresholds_(std::move(thresholds)), noise_(noise), seed_(seed) {
    require(!thresholds_.empty(), "planted evaluator needs thresholds");
    for (auto t : thresholds_) require(t >= 1, "planted thresholds must be >= 1");
    require(noise >= 0.0 && std::isfinite(noise), "noise amplitude must be finite and >= 0");
}

double PlantedEvaluator::clean_accuracy(std::size_t group, std::int64_t t) const {
    require(group < thresholds_.size(), "no planted threshold for group " + std::to_string(group));
    const auto tau = static_cast<double>(thresholds_[group]);
    const auto x = static_cast<double>(t);
    if (x <= tau) return 1.0;
    return std::max(0.0, 1.0 - (x - tau) / tau);
}

double PlantedEvaluator::evaluate(const CellRequest& cell) const {
    double acc = clean_accuracy(cell.group, cell.detect_length);
    if (noise_ > 0.0) {
        std::mt19937_64 rng(derive_seed(seed_ ^ cell.seed, "planted-noise",
                                        cell.group * 1000003ULL + static_cast<std::uint64_t>(cell.detect_length)));
        acc += std::uniform_real_distribution<double>(-noise_, noise_)(rng);
    }
    return std::clamp(acc, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

DetectionReport run_sweep(const SweepConfig& config, const Evaluator& evaluator) {
    config.validate();
    const auto groups = partition_groups(config.head_dim / 2, config.num_groups);
    const auto C = groups.size();
    const auto G = config.detect_grid.size();

    DetectionReport report;
    report.grid = config.detect_grid;
    report.scores.assign(C, std::vector<double>(G, 0.0));
    report.metadata.seed = config.seed;
    report.metadata.evaluator = evaluator.id();
    report.metadata.samples = config.samples;
    report.metadata.window = config.window;
    report.metadata.baseline_length = config.baseline_length;
    report.metadata.context_length = config.context_length;

    const PositionMapSpec baseline(maps::Detection{config.baseline_length, config.window, config.context_length});
    const std::uint64_t cell_seed = derive_seed(config.seed, "sweep");

    const std::size_t workers = config.workers == 0 ? default_workers() : config.workers;
    parallel_for(C * G, workers, [&](std::size_t item) {
        const std::size_t i = item / G;
        const std::size_t gi = item % G;
        CellRequest cell;
        cell.group = i;
        cell.detect_length = config.detect_grid[gi];
        cell.context_length = config.context_length;
        cell.groups = groups;
        cell.group_maps.assign(C, baseline);
        cell.group_maps[i] = PositionMapSpec(maps::Detection{cell.detect_length, config.window, config.context_length});
        cell.samples = config.samples;
        cell.seed = cell_seed;
        double acc;
        try {
            acc = evaluator.evaluate(cell);
        } catch (const std::exception& e) {
            throw std::runtime_error("evaluator '" + evaluator.id() + "' failed at cell (group " + std::to_string(i) +
                                     ", t=" + std::to_string(cell.detect_length) + "): " + e.what());
        }
        report.scores[i][gi] = acc;
    });

    rank_and_derive(report);
    return report;
}

void rank_and_derive(DetectionReport& report) {
    const auto G = report.grid.size();
    require(G > 0, "report has an empty grid");
    report.ranks.assign(report.groups(), std::vector<int>(G, 0));
    report.effective_lengths.assign(report.groups(), 0);
    for (std::size_t i = 0; i < report.groups(); ++i) {
        const auto& row = report.scores[i];
        require(row.size() == G, "score row " + std::to_string(i) + " does not match the grid");
        for (double v : row) require(!std::isnan(v), "score matrix contains NaN in group " + std::to_string(i));
        std::vector<std::size_t> order(G);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (row[a] != row[b]) return row[a] > row[b];
            return report.grid[a] > report.grid[b];
        });
        for (std::size_t r = 0; r < G; ++r) report.ranks[i][order[r]] = static_cast<int>(r + 1);
        report.effective_lengths[i] = report.grid[order.front()];
    }
}

std::vector<std::int64_t> select_rank(const DetectionReport& report, int n) {
    require(n >= 1 && static_cast<std::size_t>(n) <= report.grid.size(), "rank out of range");
    require(report.ranks.size() == report.groups(), "report has not been ranked");
    std::vector<std::int64_t> out;
    for (const auto& row : report.ranks) {
        const auto it = std::find(row.begin(), row.end(), n);
        require(it != row.end(), "rank row is not a permutation");
        out.push_back(report.grid[static_cast<std::size_t>(it - row.begin())]);
    }
    return out;
}

// ---------------------------------------------------------------------------

SyntheticNiahTask generate_niah(std::int64_t length, int num_needles, std::uint64_t seed, NiahVocab vocab) {
    require(vocab.filler >= 2, "filler vocabulary must hold at least 2 tokens");
    require(num_needles >= 0 && num_needles <= vocab.needle_keys,
            "needle count must lie in [0, " + std::to_string(vocab.needle_keys) + "]");
    const std::int64_t context = length - num_needles;
    require(length >= 1 && context >= 3 * static_cast<std::int64_t>(num_needles),
            "length " + std::to_string(length) + " is too small for " + std::to_string(num_needles) + " needles");

    std::mt19937_64 rng(derive_seed(seed, "niah"));
    std::uniform_int_distribution<int> filler(0, vocab.filler - 1);

    SyntheticNiahTask task;
    task.vocab = vocab;
    task.context_length = length;
    task.tokens.resize(static_cast<std::size_t>(length));
    for (std::int64_t p = 0; p < context; ++p) task.tokens[static_cast<std::size_t>(p)] = filler(rng);

    std::vector<int> keys(static_cast<std::size_t>(vocab.needle_keys));
    std::iota(keys.begin(), keys.end(), vocab.filler);
    std::shuffle(keys.begin(), keys.end(), rng);

    // Needle i sits in stratum i of the context; key and value both inside it.
    for (int i = 0; i < num_needles; ++i) {
        const std::int64_t lo = context * i / num_needles;
        const std::int64_t hi = context * (i + 1) / num_needles - 2;  // last valid key slot
        const std::int64_t pos = std::uniform_int_distribution<std::int64_t>(lo, std::max(lo, hi))(rng);
        Needle n{keys[static_cast<std::size_t>(i)], filler(rng), pos};
        task.tokens[static_cast<std::size_t>(pos)] = n.key;
        task.tokens[static_cast<std::size_t>(pos + 1)] = n.value;
        task.needles.push_back(n);
    }

    std::vector<std::size_t> order(static_cast<std::size_t>(num_needles));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Needle> asked;
    for (std::size_t q = 0; q < order.size(); ++q) {
        const auto pos = context + static_cast<std::int64_t>(q);
        task.tokens[static_cast<std::size_t>(pos)] = task.needles[order[q]].key;
        task.query_positions.push_back(pos);
        asked.push_back(task.needles[order[q]]);
    }
    task.needles = std::move(asked);
    return task;
}

std::vector<int> lookup_answers(const SyntheticNiahTask& task) {
    std::map<int, int> next_of;
    const auto context = task.context_length - static_cast<std::int64_t>(task.query_positions.size());
    for (std::int64_t p = 0; p + 1 < context; ++p) {
        const int tok = task.tokens[static_cast<std::size_t>(p)];
        if (tok >= task.vocab.filler) next_of[tok] = task.tokens[static_cast<std::size_t>(p + 1)];
    }
    std::vector<int> out;
    for (auto pos : task.query_positions) {
        const auto it = next_of.find(task.tokens[static_cast<std::size_t>(pos)]);
        out.push_back(it == next_of.end() ? -1 : it->second);
    }
    return out;
}

std::optional<double> niah_accuracy(const SyntheticNiahTask& task, const std::vector<int>& predictions) {
    require(predictions.size() == task.needles.size(), "one prediction per needle is required");
    if (task.needles.empty()) return std::nullopt;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == task.needles[i].value;
    return static_cast<double>(hits) / static_cast<double>(task.needles.size());
}

// ---------------------------------------------------------------------------

namespace {

struct Registry {
    std::mutex mutex;
    std::map<std::string, EvaluatorFactory> factories;

    Registry() {
        factories["planted"] = [](const EvaluatorSpec& s) -> std::unique_ptr<Evaluator> {
            return std::make_unique<PlantedEvaluator>(s.thresholds, s.noise, s.seed);
        };
        factories["constant"] = [](const EvaluatorSpec& s) -> std::unique_ptr<Evaluator> {
            require(s.constant >= 0.0 && s.constant <= 1.0, "constant evaluator value must lie in [0, 1]");
            return std::make_unique<ConstantEvaluator>(s.constant);
        };
        factories["fixture"] = [](const EvaluatorSpec& s) -> std::unique_ptr<Evaluator> {
            FixtureSpec spec;
            spec.train_length = s.fixture_train_length;
            return std::make_unique<FixtureEvaluator>(build_fixture_model(spec));
        };
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void register_evaluator(const std::string& id, EvaluatorFactory factory) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.factories[id] = std::move(factory);
}

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSpec& spec) {
    auto& r = registry();
    EvaluatorFactory factory;
    {
        std::lock_guard lock(r.mutex);
        const auto it = r.factories.find(spec.id);
        require(it != r.factories.end(), "unknown evaluator '" + spec.id + "'");
        factory = it->second;
    }
    return factory(spec);
}

std::vector<std::string> registered_evaluators() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> out;
    for (const auto& [id, f] : r.factories) out.push_back(id);
    return out;
}

}  // namespace dpe
