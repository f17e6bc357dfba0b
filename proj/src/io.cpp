#include "dpe/io.hpp"

#include "dpe/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace dpe {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(std::string("config field '") + key + "': " + e.what());
    }
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::validate() const {
    require(train_length >= 1, "train_length must be >= 1");
    require(target_length >= train_length, "target_length must be >= train_length");
    require(num_groups >= 1, "num_groups must be >= 1");
    require(window >= 0, "window must be >= 0");
    require(head_dim >= 2 && head_dim % 2 == 0, "head_dim must be even and >= 2");
    require(top_k >= 0 && top_k <= head_dim / 2, "top_k must lie in [0, head_dim/2]");
    require(heads >= 1, "heads must be >= 1");
    require(std::isfinite(base) && base > 1.0, "base must be > 1");
    require(effective_lengths.empty() || static_cast<int>(effective_lengths.size()) == num_groups,
            "effective_lengths must have num_groups entries");
    const auto& known = known_methods();
    require(std::find(known.begin(), known.end(), baseline) != known.end(), "unknown baseline '" + baseline + "'");
    for (const auto& m : fixture.methods) {
        require(std::find(known.begin(), known.end(), m) != known.end(), "unknown baseline '" + m + "'");
    }
    require(fixture.train_length >= 2 && fixture.target_length >= fixture.train_length,
            "fixture lengths must satisfy 2 <= train <= target");
}

bool RunConfig::operator==(const RunConfig& o) const {
    return train_length == o.train_length && target_length == o.target_length && num_groups == o.num_groups &&
           window == o.window && top_k == o.top_k && effective_lengths == o.effective_lengths &&
           baseline == o.baseline && baselines == o.baselines && seed == o.seed && output_dir == o.output_dir &&
           head_dim == o.head_dim && base == o.base && heads == o.heads && detect_grid == o.detect_grid &&
           samples == o.samples && baseline_length == o.baseline_length && context_length == o.context_length &&
           evaluator.id == o.evaluator.id && evaluator.thresholds == o.evaluator.thresholds &&
           evaluator.noise == o.evaluator.noise && evaluator.constant == o.evaluator.constant &&
           evaluator.fixture_train_length == o.evaluator.fixture_train_length && fixture == o.fixture;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["train_length"] = c.train_length;
    j["target_length"] = c.target_length;
    j["num_groups"] = c.num_groups;
    j["window"] = c.window;
    j["top_k"] = c.top_k;
    j["effective_lengths"] = c.effective_lengths;
    j["baseline"] = c.baseline;
    j["baselines"] = {
        {"ntk_dynamic", {{"factor", c.baselines.ntk_factor}}},
        {"yarn",
         {{"beta_fast", c.baselines.yarn.beta_fast},
          {"beta_slow", c.baselines.yarn.beta_slow},
          {"scale", c.baselines.yarn.scale},
          {"attn_factor", c.baselines.yarn.attn_factor},
          {"original_length", c.baselines.yarn.original_length}}},
        {"self_extend", {{"window", c.baselines.self_extend_window}, {"group", c.baselines.self_extend_group}}},
        {"rerope", {{"window", c.baselines.rerope_window}}},
    };
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["head_dim"] = c.head_dim;
    j["base"] = c.base;
    j["heads"] = c.heads;
    j["detect_grid"] = c.detect_grid;
    j["samples"] = c.samples;
    j["baseline_length"] = c.baseline_length ? json(*c.baseline_length) : json(nullptr);
    j["context_length"] = c.context_length ? json(*c.context_length) : json(nullptr);
    j["evaluator"] = {{"id", c.evaluator.id},
                      {"thresholds", c.evaluator.thresholds},
                      {"noise", c.evaluator.noise},
                      {"constant", c.evaluator.constant},
                      {"fixture_train_length", c.evaluator.fixture_train_length}};
    j["fixture"] = {{"train_length", c.fixture.train_length},
                    {"target_length", c.fixture.target_length},
                    {"samples", c.fixture.samples},
                    {"detect_samples", c.fixture.detect_samples},
                    {"methods", c.fixture.methods}};
    return j;
}

RunConfig config_from_json(const json& j) {
    require(j.is_object(), "config must be a JSON object");
    RunConfig c;
    c.train_length = get_or(j, "train_length", c.train_length);
    c.target_length = get_or(j, "target_length", c.target_length);
    c.num_groups = get_or(j, "num_groups", c.num_groups);
    c.window = get_or(j, "window", c.window);
    c.top_k = get_or(j, "top_k", c.top_k);
    c.effective_lengths = get_or(j, "effective_lengths", c.effective_lengths);
    c.baseline = get_or(j, "baseline", c.baseline);
    if (j.contains("baselines")) {
        const auto& b = j.at("baselines");
        if (b.contains("ntk_dynamic")) c.baselines.ntk_factor = get_or(b.at("ntk_dynamic"), "factor", c.baselines.ntk_factor);
        if (b.contains("yarn")) {
            const auto& y = b.at("yarn");
            auto& yarn = c.baselines.yarn;
            yarn.beta_fast = get_or(y, "beta_fast", yarn.beta_fast);
            yarn.beta_slow = get_or(y, "beta_slow", yarn.beta_slow);
            yarn.scale = get_or(y, "scale", yarn.scale);
            yarn.attn_factor = get_or(y, "attn_factor", yarn.attn_factor);
            yarn.original_length = get_or(y, "original_length", yarn.original_length);
        }
        if (b.contains("self_extend")) {
            c.baselines.self_extend_window = get_or(b.at("self_extend"), "window", c.baselines.self_extend_window);
            c.baselines.self_extend_group = get_or(b.at("self_extend"), "group", c.baselines.self_extend_group);
        }
        if (b.contains("rerope")) c.baselines.rerope_window = get_or(b.at("rerope"), "window", c.baselines.rerope_window);
    }
    c.seed = get_or(j, "seed", c.seed);
    c.output_dir = get_or(j, "output_dir", c.output_dir);
    c.head_dim = get_or(j, "head_dim", c.head_dim);
    c.base = get_or(j, "base", c.base);
    c.heads = get_or(j, "heads", c.heads);
    c.detect_grid = get_or(j, "detect_grid", c.detect_grid);
    c.samples = get_or(j, "samples", c.samples);
    if (j.contains("baseline_length") && !j.at("baseline_length").is_null())
        c.baseline_length = get_or<std::int64_t>(j, "baseline_length", 0);
    if (j.contains("context_length") && !j.at("context_length").is_null())
        c.context_length = get_or<std::int64_t>(j, "context_length", 0);
    if (j.contains("evaluator")) {
        const auto& e = j.at("evaluator");
        c.evaluator.id = get_or(e, "id", c.evaluator.id);
        c.evaluator.thresholds = get_or(e, "thresholds", c.evaluator.thresholds);
        c.evaluator.noise = get_or(e, "noise", c.evaluator.noise);
        c.evaluator.constant = get_or(e, "constant", c.evaluator.constant);
        c.evaluator.fixture_train_length = get_or(e, "fixture_train_length", c.evaluator.fixture_train_length);
    }
    if (j.contains("fixture")) {
        const auto& f = j.at("fixture");
        c.fixture.train_length = get_or(f, "train_length", c.fixture.train_length);
        c.fixture.target_length = get_or(f, "target_length", c.fixture.target_length);
        c.fixture.samples = get_or(f, "samples", c.fixture.samples);
        c.fixture.detect_samples = get_or(f, "detect_samples", c.fixture.detect_samples);
        c.fixture.methods = get_or(f, "methods", c.fixture.methods);
    }
    c.evaluator.seed = c.seed;
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        fail("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

SweepConfig sweep_config(const RunConfig& c) {
    SweepConfig s;
    s.head_dim = c.head_dim;
    s.num_groups = c.num_groups;
    s.detect_grid = c.detect_grid;
    s.window = c.window;
    s.train_length = c.train_length;
    s.baseline_length = c.baseline_length.value_or(c.train_length / 2);
    s.context_length = c.context_length.value_or(c.target_length);
    s.samples = c.samples;
    s.seed = c.seed;
    return s;
}

FixtureEvalConfig fixture_eval_config(const RunConfig& c) {
    FixtureEvalConfig f;
    f.train_length = c.fixture.train_length;
    f.target_length = c.fixture.target_length;
    f.num_groups = c.num_groups;
    f.samples = c.fixture.samples;
    f.detect_samples = c.fixture.detect_samples;
    f.seed = c.seed;
    return f;
}

// ---------------------------------------------------------------------------
// Plans and reports

json plan_to_json(const DimensionPlan& plan) {
    json groups = json::array();
    for (const auto& g : plan.groups) groups.push_back({g.begin, g.end});
    return {
        {"format", "dpe-plan"},
        {"versions", {{"format", kPlanFormatVersion}, {"library", kLibraryVersion}}},
        {"head_dim", plan.head_dim},
        {"train_length", plan.train_length},
        {"target_length", plan.target_length},
        {"window", plan.window},
        {"clamp", plan.clamp},
        {"groups", groups},
        {"E", plan.effective_lengths},
        {"S", plan.scale_sizes},
        {"key_dims", plan.key_dims},
    };
}

DimensionPlan plan_from_json(const json& j) {
    try {
        require(j.value("format", std::string()) == "dpe-plan", "not a dpe-plan document");
        const int version = j.at("versions").at("format").get<int>();
        require(version == kPlanFormatVersion, "unsupported plan format version " + std::to_string(version));
        DimensionPlan plan;
        plan.head_dim = j.at("head_dim").get<int>();
        plan.train_length = j.at("train_length").get<std::int64_t>();
        plan.target_length = j.at("target_length").get<std::int64_t>();
        plan.window = j.at("window").get<std::int64_t>();
        plan.clamp = j.at("clamp").get<bool>();
        for (const auto& g : j.at("groups")) plan.groups.push_back({g.at(0).get<int>(), g.at(1).get<int>()});
        plan.effective_lengths = j.at("E").get<std::vector<std::int64_t>>();
        plan.scale_sizes = j.at("S").get<std::vector<std::int64_t>>();
        plan.key_dims = j.at("key_dims").get<std::vector<std::vector<int>>>();
        plan.validate();
        return plan;
    } catch (const json::exception& e) {
        fail(std::string("malformed plan: ") + e.what());
    }
}

json report_to_json(const DetectionReport& r) {
    json meta = {{"seed", r.metadata.seed},
                 {"evaluator", r.metadata.evaluator},
                 {"samples", r.metadata.samples},
                 {"window", r.metadata.window},
                 {"baseline_length", r.metadata.baseline_length},
                 {"context_length", r.metadata.context_length}};
    if (r.metadata.generated_at) meta["generated_at"] = *r.metadata.generated_at;
    return {{"format", "dpe-detection"}, {"grid", r.grid},   {"scores", r.scores},
            {"ranks", r.ranks},          {"E", r.effective_lengths}, {"metadata", meta}};
}

DetectionReport report_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != "dpe-detection") throw FormatError("not a dpe-detection document");
        DetectionReport r;
        r.grid = j.at("grid").get<std::vector<std::int64_t>>();
        r.scores = j.at("scores").get<std::vector<std::vector<double>>>();
        r.ranks = j.at("ranks").get<std::vector<std::vector<int>>>();
        r.effective_lengths = j.at("E").get<std::vector<std::int64_t>>();
        const auto& m = j.at("metadata");
        r.metadata.seed = m.at("seed").get<std::uint64_t>();
        r.metadata.evaluator = m.at("evaluator").get<std::string>();
        r.metadata.samples = m.at("samples").get<std::size_t>();
        r.metadata.window = m.at("window").get<std::int64_t>();
        r.metadata.baseline_length = m.at("baseline_length").get<std::int64_t>();
        r.metadata.context_length = m.at("context_length").get<std::int64_t>();
        if (m.contains("generated_at")) r.metadata.generated_at = m.at("generated_at").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed detection report: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// CSV

std::string detection_csv(const DetectionReport& r) {
    std::ostringstream out;
    out << "group,t,accuracy,rank\n";
    for (std::size_t i = 0; i < r.groups(); ++i) {
        for (std::size_t g = 0; g < r.grid.size(); ++g) {
            out << i << ',' << r.grid[g] << ',' << fmt("%.6f", r.scores[i][g]) << ','
                << (r.ranks.empty() ? 0 : r.ranks[i][g]) << '\n';
        }
    }
    return out.str();
}

std::string norms_csv(const NormProfile& p) {
    std::ostringstream out;
    out << "head,pair,score\n";
    for (std::size_t h = 0; h < p.heads; ++h) {
        for (int j = 0; j < p.pairs; ++j) out << h << ',' << j << ',' << fmt("%.9g", p.score(h, j)) << '\n';
    }
    return out.str();
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "engine,L,H,d,tile,mean_ms,std_ms,peak_bytes\n";
    for (const auto& r : rows) {
        out << r.engine << ',' << r.length << ',' << r.heads << ',' << r.head_dim << ',' << r.tile << ','
            << fmt("%.3f", r.mean_ms) << ',' << fmt("%.3f", r.std_ms) << ',' << r.peak_bytes << '\n';
    }
    return out.str();
}

std::string overhead_csv(const std::vector<OverheadRow>& rows) {
    std::ostringstream out;
    out << "L,standard_ms,dpe_ms,ratio,cv_standard,cv_dpe\n";
    for (const auto& r : rows) {
        out << r.length << ',' << fmt("%.3f", r.standard_ms) << ',' << fmt("%.3f", r.dpe_ms) << ','
            << fmt("%.4f", r.ratio) << ',' << fmt("%.4f", r.cv_standard) << ',' << fmt("%.4f", r.cv_dpe) << '\n';
    }
    return out.str();
}

std::string eval_csv(const std::vector<MethodResult>& rows) {
    std::ostringstream out;
    out << "method,context_length,correct,total,accuracy\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.context_length << ',' << r.correct << ',' << r.total << ','
            << fmt("%.6f", r.accuracy()) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// White -> dark blue ramp.
std::string color(double t) {
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(247 - t * (247 - 8)));
    const int g = static_cast<int>(std::lround(251 - t * (251 - 48)));
    const int b = static_cast<int>(std::lround(255 - t * (255 - 107)));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

std::string svg_heatmap(const std::vector<std::vector<double>>& cells, const HeatmapSpec& spec) {
    const std::size_t rows = cells.size();
    const std::size_t cols = rows ? cells.front().size() : 0;
    const int cell = 18, left = 70, top = 40, bottom = 50;
    const int width = left + static_cast<int>(cols) * cell + 20;
    const int height = top + static_cast<int>(rows) * cell + bottom;

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : cells) {
        for (double v : r) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi > lo ? hi - lo : 1.0;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\" font-family=\"sans-serif\">" << escape_xml(spec.title)
        << "</text>\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = cells[r][c];
            out << "<rect x=\"" << left + static_cast<int>(c) * cell << "\" y=\"" << top + static_cast<int>(r) * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
                << color(std::isfinite(lo) ? (v - lo) / span : 0.0) << "\"><title>" << fmt("%.6g", v)
                << "</title></rect>\n";
        }
        if (r < spec.y_ticks.size()) {
            out << "<text x=\"" << left - 4 << "\" y=\"" << top + static_cast<int>(r) * cell + 13
                << "\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">" << escape_xml(spec.y_ticks[r])
                << "</text>\n";
        }
    }
    for (std::size_t c = 0; c < cols && c < spec.x_ticks.size(); ++c) {
        out << "<text x=\"" << left + static_cast<int>(c) * cell + cell / 2 << "\" y=\""
            << top + static_cast<int>(rows) * cell + 14 << "\" font-size=\"9\" text-anchor=\"middle\" font-family=\"sans-serif\">"
            << escape_xml(spec.x_ticks[c]) << "</text>\n";
    }
    out << "<text x=\"" << left << "\" y=\"" << height - 8 << "\" font-size=\"12\" font-family=\"sans-serif\">"
        << escape_xml(spec.x_label) << "</text>\n";
    out << "<text x=\"12\" y=\"" << top + static_cast<int>(rows) * cell / 2
        << "\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 12 "
        << top + static_cast<int>(rows) * cell / 2 << ")\">" << escape_xml(spec.y_label) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string norms_svg(const NormProfile& p) {
    std::vector<std::vector<double>> cells(p.heads, std::vector<double>(static_cast<std::size_t>(p.pairs)));
    HeatmapSpec spec{"2-norm attention contribution", "pair index", "head", {}, {}};
    for (std::size_t h = 0; h < p.heads; ++h) {
        for (int j = 0; j < p.pairs; ++j) cells[h][static_cast<std::size_t>(j)] = p.score(h, j);
        spec.y_ticks.push_back(std::to_string(h));
    }
    for (int j = 0; j < p.pairs; ++j) spec.x_ticks.push_back(j % 8 == 0 ? std::to_string(j) : "");
    return svg_heatmap(cells, spec);
}

std::string detection_svg(const DetectionReport& r) {
    HeatmapSpec spec{"detection accuracy by group and detecting length", "detecting length t", "group", {}, {}};
    for (auto t : r.grid) spec.x_ticks.push_back(t >= 1024 && t % 1024 == 0 ? std::to_string(t / 1024) + "k" : std::to_string(t));
    for (std::size_t i = 0; i < r.groups(); ++i) spec.y_ticks.push_back("g" + std::to_string(i));
    return svg_heatmap(r.scores, spec);
}

// ---------------------------------------------------------------------------
// DPET1 tensors

namespace {

constexpr unsigned char kMagic[5] = {'D', 'P', 'E', 'T', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::vector<unsigned char>& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    while (n > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = crc32(crc, data, chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<unsigned char> encode_tensor(const TensorData& t) {
    std::size_t count = 1;
    for (auto d : t.dims) count *= d;
    require(count == t.values.size(), "tensor payload does not match its dimensions");
    std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    for (float f : t.values) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        put_u32(out, bits);
    }
    put_u32(out, crc_of(out.data(), out.size()));
    return out;
}

TensorData decode_tensor(const std::vector<unsigned char>& in) {
    if (in.size() < 5 + 4 + 4 || !std::equal(std::begin(kMagic), std::end(kMagic), in.begin())) {
        throw FormatError("tensor data does not start with the DPET1 magic");
    }
    const std::size_t body = in.size() - 4;
    if (crc_of(in.data(), body) != get_u32(in, body)) throw FormatError("tensor CRC32 mismatch");
    const std::uint32_t rank = get_u32(in, 5);
    std::size_t at = 9;
    if (body < at + 4ull * rank) throw FormatError("tensor header is truncated");
    TensorData t;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i, at += 4) {
        t.dims.push_back(get_u32(in, at));
        count *= t.dims.back();
    }
    if (body - at != count * 4) {
        throw FormatError("tensor payload holds " + std::to_string(body - at) + " bytes, dimensions need " +
                          std::to_string(count * 4));
    }
    t.values.resize(count);
    for (std::size_t i = 0; i < count; ++i, at += 4) {
        const std::uint32_t bits = get_u32(in, at);
        std::memcpy(&t.values[i], &bits, sizeof bits);
    }
    return t;
}

void write_tensor(const std::filesystem::path& path, const TensorData& tensor) {
    const auto bytes = encode_tensor(tensor);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TensorData read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open tensor file " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

TensorData to_tensor_data(const Tensor3& t) {
    TensorData out;
    out.dims = {static_cast<std::uint32_t>(t.heads()), static_cast<std::uint32_t>(t.length()),
                static_cast<std::uint32_t>(t.width())};
    out.values.assign(t.data().begin(), t.data().end());
    return out;
}

Tensor3 to_tensor3(const TensorData& t) {
    if (t.dims.size() != 3) throw FormatError("expected a rank-3 tensor, got rank " + std::to_string(t.dims.size()));
    Tensor3 out(t.dims[0], t.dims[1], t.dims[2]);
    std::copy(t.values.begin(), t.values.end(), out.data().begin());
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dpe
