#pragma once

// Effective-length detection: sweep one dimension group's detecting length
// while the rest stay at a baseline, score each cell with a pluggable
// evaluator, rank each row, and read off the rank-1 length per group.

#include "dpe/position_maps.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dpe {

struct SweepConfig {
    int head_dim = 128;
    int num_groups = 8;
    std::vector<std::int64_t> detect_grid;  // strictly increasing
    std::int64_t window = 1024;
    std::int64_t train_length = 8192;
    std::int64_t baseline_length = 4096;   // half the train length
    std::int64_t context_length = 131072;  // L in the detection map
    std::size_t samples = 20;
    std::uint64_t seed = 0;
    std::size_t workers = 0;

    void validate() const;
    // Powers of two from `lo` to `hi` inclusive.
    static std::vector<std::int64_t> power_grid(std::int64_t lo, std::int64_t hi);
};

// What an evaluator sees for one (group, detecting length) cell.
struct CellRequest {
    std::size_t group = 0;
    std::int64_t detect_length = 0;
    std::int64_t context_length = 0;
    std::vector<GroupRange> groups;
    std::vector<PositionMapSpec> group_maps;  // one per group
    std::size_t samples = 0;
    std::uint64_t seed = 0;  // identical for every cell of a sweep
};

// Must be safe to call concurrently on distinct cells.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual std::string id() const = 0;
    virtual double evaluate(const CellRequest& cell) const = 0;  // accuracy in [0, 1]
};

// acc_i(t) = 1 for t <= tau_i, else max(0, 1 - (t - tau_i) / tau_i), plus
// optional uniform noise in [-noise, noise] keyed by the cell, clamped to [0, 1].
class PlantedEvaluator final : public Evaluator {
public:
    PlantedEvaluator(std::vector<std::int64_t> thresholds, double noise = 0.0, std::uint64_t seed = 0);
    std::string id() const override { return "planted"; }
    double evaluate(const CellRequest& cell) const override;
    double clean_accuracy(std::size_t group, std::int64_t t) const;

private:
    std::vector<std::int64_t> thresholds_;
    double noise_;
    std::uint64_t seed_;
};

class ConstantEvaluator final : public Evaluator {
public:
    explicit ConstantEvaluator(double value) : value_(value) {}
    std::string id() const override { return "constant"; }
    double evaluate(const CellRequest&) const override { return value_; }

private:
    double value_;
};

struct DetectionMetadata {
    std::uint64_t seed = 0;
    std::string evaluator;
    std::size_t samples = 0;
    std::int64_t window = 0;
    std::int64_t baseline_length = 0;
    std::int64_t context_length = 0;
    std::optional<std::string> generated_at;  // omitted unless requested

    bool operator==(const DetectionMetadata&) const = default;
};

struct DetectionReport {
    std::vector<std::int64_t> grid;
    std::vector<std::vector<double>> scores;  // groups x grid
    std::vector<std::vector<int>> ranks;      // groups x grid, 1 = best
    std::vector<std::int64_t> effective_lengths;
    DetectionMetadata metadata;

    std::size_t groups() const noexcept { return scores.size(); }
    bool operator==(const DetectionReport&) const = default;
};

// Fills the score matrix; ranks and E are derived by rank_and_derive.
DetectionReport run_sweep(const SweepConfig& config, const Evaluator& evaluator);

// Higher accuracy ranks first; equal accuracies put the larger t first.
void rank_and_derive(DetectionReport& report);

// Detecting length holding rank n (1-based) in each group's row.
std::vector<std::int64_t> select_rank(const DetectionReport& report, int n);

// ---------------------------------------------------------------------------
// Synthetic needle-in-a-haystack

struct NiahVocab {
    int filler = 64;       // haystack tokens [0, filler), also the value alphabet
    int needle_keys = 8;   // reserved key tokens [filler, filler + needle_keys)
    int size() const noexcept { return filler + needle_keys; }
};

struct Needle {
    int key = 0;
    int value = 0;
    std::int64_t position = 0;  // of the key token; the value follows it
};

struct SyntheticNiahTask {
    std::vector<int> tokens;                  // context followed by one query token per needle
    std::vector<Needle> needles;
    std::vector<std::int64_t> query_positions;  // query_positions[i] asks for needles[i]
    std::int64_t context_length = 0;           // tokens.size()
    NiahVocab vocab;
};

SyntheticNiahTask generate_niah(std::int64_t length, int num_needles, std::uint64_t seed, NiahVocab vocab = {});

// Exact dictionary lookup of every queried key in the raw token sequence.
std::vector<int> lookup_answers(const SyntheticNiahTask& task);

// Fraction of exact matches; nullopt when the task has no needles.
std::optional<double> niah_accuracy(const SyntheticNiahTask& task, const std::vector<int>& predictions);

// ---------------------------------------------------------------------------
// Evaluator registry

struct EvaluatorSpec {
    std::string id = "planted";
    std::vector<std::int64_t> thresholds;  // planted
    double noise = 0.0;                    // planted
    double constant = 1.0;                 // constant
    std::int64_t fixture_train_length = 256;  // fixture
    std::uint64_t seed = 0;
};

// Built-ins: "planted", "constant", "fixture" (induction fixture NIAH).
using EvaluatorFactory = std::function<std::unique_ptr<Evaluator>(const EvaluatorSpec&)>;

void register_evaluator(const std::string& id, EvaluatorFactory factory);
std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSpec& spec);
std::vector<std::string> registered_evaluators();

}  // namespace dpe
