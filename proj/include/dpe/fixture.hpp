#pragma once

// A two-layer attention-only transformer with hand-set weights that solves
// the synthetic NIAH task through rotary attention:
//   layer 1  previous-token head: a purely positional logit
//            gain * mean_j cos(theta_j (rel - 1)) copies each token's key code
//            one position forward;
//   layer 2  match-and-copy head: the query token's code is matched against
//            the copied codes in the lowest-frequency pairs and the matched
//            position's embedding is read out.
// The base is chosen so the lowest-frequency content pair turns by
// `content_angle` radians over `train_length`; beyond a few train lengths the
// content match rotates out of phase, which gives the fixture a finite
// effective context under standard RoPE.

#include "dpe/attention.hpp"
#include "dpe/detection.hpp"
#include "dpe/position_maps.hpp"
#include "dpe/rope.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dpe {

struct FixtureSpec {
    NiahVocab vocab;
    int head_dim = 32;
    int content_pairs = 4;  // lowest-frequency pairs carrying key codes
    std::int64_t train_length = 256;
    double content_angle = 1.0;
    double prev_gain = 40.0;
    double match_gain = 16.0;
    int needles = 4;
    std::uint64_t seed = 7;
};

// Position maps and frequency scaling for one forward pass. The layout has two
// heads: index 0 is layer 1, index 1 is layer 2.
struct FixtureRun {
    PositionLayout layout;
    FrequencyScaling scaling = NoScaling{};
};

class FixtureModel {
public:
    explicit FixtureModel(const FixtureSpec& spec);

    const FixtureSpec& spec() const noexcept { return spec_; }
    const FrequencyBasis& basis() const noexcept { return basis_; }
    int pairs() const noexcept { return basis_.pairs(); }
    static constexpr std::size_t kHeads = 2;

    FixtureRun standard_run() const;

    std::vector<int> predict(const SyntheticNiahTask& task, const FixtureRun& run) const;
    std::optional<double> accuracy(const SyntheticNiahTask& task, const FixtureRun& run) const;

    // Pre-rotation queries and keys of both layers (head index = layer).
    struct Activations {
        Tensor3 queries;
        Tensor3 keys;
    };
    Activations capture(const SyntheticNiahTask& task) const;

    SyntheticNiahTask sample_task(std::int64_t length, std::uint64_t seed, std::size_t index) const;

private:
    struct Pass {
        std::vector<int> predictions;
        Activations activations;
    };
    Pass forward(const SyntheticNiahTask& task, const FixtureRun& run) const;

    FixtureSpec spec_;
    FrequencyBasis basis_;
    std::size_t width_ = 0;  // residual stream width
    std::vector<float> embed_;  // vocab x width
    std::vector<float> wq1_, wk1_, wv1_, wo1_, wq2_, wk2_, wv2_;
};

FixtureModel build_fixture_model(const FixtureSpec& spec);

// Detection evaluator backed by the fixture: mean NIAH accuracy over
// cell.samples tasks, every pair of group i (both layers) using group_maps[i].
class FixtureEvaluator final : public Evaluator {
public:
    explicit FixtureEvaluator(FixtureModel model) : model_(std::move(model)) {}
    std::string id() const override { return "fixture"; }
    double evaluate(const CellRequest& cell) const override;
    const FixtureModel& model() const noexcept { return model_; }

private:
    FixtureModel model_;
};

// Baseline comparison on the fixture. Hyperparameters default to the
// 8K-context reference settings rescaled to the fixture's train length.
struct FixtureEvalConfig {
    std::int64_t train_length = 256;
    std::int64_t target_length = 1024;
    int num_groups = 8;
    std::optional<std::int64_t> window;            // default train/8
    std::optional<int> top_k;                      // default 3/4 of the pairs
    std::vector<std::int64_t> effective_lengths;   // empty: detect on the fixture
    std::size_t samples = 20;
    std::size_t detect_samples = 4;
    std::optional<std::int64_t> rerope_window;     // default train/4
    std::optional<std::int64_t> self_extend_window;  // default train/8
    std::optional<std::int64_t> self_extend_group;   // default 2 * target/train
    std::optional<double> ntk_factor;              // default target/train
    std::optional<double> yarn_scale;              // default target/train
    double yarn_beta_fast = 32.0;
    double yarn_beta_slow = 1.0;
    double yarn_attn_factor = 1.3862943611198906;
    std::uint64_t seed = 0;
    std::size_t workers = 0;

    std::int64_t resolved_window() const { return window.value_or(train_length / 8); }
};

struct MethodResult {
    std::string method;
    std::int64_t context_length = 0;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const noexcept { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

const std::vector<std::string>& known_methods();

// Effective lengths for the fixture by a detection sweep at the target length.
DetectionReport detect_fixture_lengths(const FixtureModel& model, const FixtureEvalConfig& config);

// DPE plan for the fixture: norms captured on one target-length task, top-k
// key pairs per layer-head, effective lengths from config or detection.
DimensionPlan fixture_dpe_plan(const FixtureModel& model, const FixtureEvalConfig& config);

FixtureRun method_run(const FixtureModel& model, const std::string& method, const FixtureEvalConfig& config);

std::vector<MethodResult> evaluate_methods(const FixtureModel& model, const FixtureEvalConfig& config,
                                           const std::vector<std::string>& methods);

}  // namespace dpe
