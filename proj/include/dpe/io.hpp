#pragma once

// Configuration, serialization and report emission: JSON for configs, plans
// and detection reports; CSV for matrices and timings; SVG for heatmaps; and
// the DPET1 binary tensor container.

#include "dpe/attention.hpp"
#include "dpe/contribution.hpp"
#include "dpe/detection.hpp"
#include "dpe/fixture.hpp"
#include "dpe/position_maps.hpp"
#include "dpe/rope.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dpe {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kPlanFormatVersion = 1;

struct BaselineParams {
    double ntk_factor = 16.0;
    YarnByParts yarn{};  // 32 / 1 / 16 / ln 4
    std::int64_t self_extend_window = 1024;
    std::int64_t self_extend_group = 32;
    std::int64_t rerope_window = 2048;
    bool operator==(const BaselineParams&) const = default;
};

struct FixtureSection {
    std::int64_t train_length = 256;
    std::int64_t target_length = 1024;
    std::size_t samples = 20;
    std::size_t detect_samples = 4;
    std::vector<std::string> methods;  // empty: all known methods
    bool operator==(const FixtureSection&) const = default;
};

struct RunConfig {
    std::int64_t train_length = 8192;
    std::int64_t target_length = 131072;
    int num_groups = 8;
    std::int64_t window = 1024;
    int top_k = 48;
    std::vector<std::int64_t> effective_lengths;  // optional override
    std::string baseline = "dpe";
    BaselineParams baselines;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    int head_dim = 128;
    double base = 10000.0;
    std::size_t heads = 1;

    // Detection sweep.
    std::vector<std::int64_t> detect_grid = SweepConfig::power_grid(1024, 131072);
    std::size_t samples = 20;
    std::optional<std::int64_t> baseline_length;  // default train/2
    std::optional<std::int64_t> context_length;   // default target
    EvaluatorSpec evaluator;

    FixtureSection fixture;

    void validate() const;
    bool operator==(const RunConfig& o) const;
};

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

SweepConfig sweep_config(const RunConfig& config);
FixtureEvalConfig fixture_eval_config(const RunConfig& config);

nlohmann::json plan_to_json(const DimensionPlan& plan);
DimensionPlan plan_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const DetectionReport& report);
DetectionReport report_from_json(const nlohmann::json& j);

// CSV emitters; headers are part of the file contract.
std::string detection_csv(const DetectionReport& report);   // group,t,accuracy,rank
std::string norms_csv(const NormProfile& profile);          // head,pair,score
std::string bench_csv(const std::vector<BenchRow>& rows);   // engine,L,H,d,tile,mean_ms,std_ms,peak_bytes
std::string overhead_csv(const std::vector<OverheadRow>& rows);
std::string eval_csv(const std::vector<MethodResult>& rows);  // method,context_length,correct,total,accuracy

struct HeatmapSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> x_ticks;  // one per column
    std::vector<std::string> y_ticks;  // one per row
};
std::string svg_heatmap(const std::vector<std::vector<double>>& cells, const HeatmapSpec& spec);
std::string norms_svg(const NormProfile& profile);
std::string detection_svg(const DetectionReport& report);

// DPET1: "DPET1", u32 rank, u32 dims[rank], f32 payload, u32 CRC32 of all
// preceding bytes; little-endian throughout.
struct TensorData {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
    bool operator==(const TensorData&) const = default;
};

std::vector<unsigned char> encode_tensor(const TensorData& tensor);
TensorData decode_tensor(const std::vector<unsigned char>& bytes);  // throws FormatError
void write_tensor(const std::filesystem::path& path, const TensorData& tensor);
TensorData read_tensor(const std::filesystem::path& path);

TensorData to_tensor_data(const Tensor3& t);
Tensor3 to_tensor3(const TensorData& t);  // rank 3 required

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace dpe
