// Drives the dpe executable end to end: exit codes, output files, headers.

#include "dpe/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(DPE_TEST_WORKDIR) / "cli";

int run(const std::string& args) {
    const std::string cmd = std::string(DPE_CLI_PATH) + " " + args + " >" + (kWork / "stdout.txt").string() + " 2>" +
                            (kWork / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    const auto s = slurp(p);
    return s.substr(0, s.find('\n'));
}

fs::path config(const std::string& name, const std::string& json) {
    fs::create_directories(kWork);
    const auto p = kWork / name;
    std::ofstream(p) << json;
    return p;
}

const char* kE = "[65536,16384,65536,16384,4096,4096,8192,32768]";

}  // namespace

TEST_CASE("cli plan: reference E") {
    const auto cfg = config("plan.json", std::string("{\"effective_lengths\":") + kE + "}");
    const auto out = kWork / "plan";
    REQUIRE(run("plan --config " + cfg.string() + " --out " + out.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(out / "plan.json"));
    CHECK(j.at("S") == nlohmann::json({2, 8, 2, 8, 32, 32, 16, 4}));
    for (const char* key : {"groups", "E", "S", "key_dims", "window", "versions"}) CHECK(j.contains(key));
    CHECK(dpe::plan_from_json(j).scale_sizes.size() == 8);
}

TEST_CASE("cli plan: warnings and validation") {
    const auto zero = config("plan0.json", std::string("{\"top_k\":0,\"effective_lengths\":") + kE + "}");
    REQUIRE(run("plan --config " + zero.string() + " --out " + (kWork / "p0").string()) == 0);
    CHECK(slurp(kWork / "stderr.txt").find("no key dimensions selected") != std::string::npos);

    const auto seven =
        config("plan7.json", "{\"num_groups\":7,\"effective_lengths\":[65536,16384,65536,16384,4096,4096,8192]}");
    REQUIRE(run("plan --config " + seven.string() + " --out " + (kWork / "p7").string()) == 0);
    CHECK(slurp(kWork / "stderr.txt").find("do not divide") != std::string::npos);

    const auto bad = config("planbad.json", "{\"effective_lengths\":[65536,16384]}");
    CHECK(run("plan --config " + bad.string() + " --out " + (kWork / "pb").string()) == 2);
    CHECK(run("plan --out " + (kWork / "pb").string()) == 2);  // no E at all
}

TEST_CASE("cli detect: planted recovery, determinism, empty grid") {
    const auto cfg = config("detect.json",
                            "{\"evaluator\":{\"id\":\"planted\",\"thresholds\":"
                            "[2048,1024,4096,131072,8192,16384,65536,32768]}}");
    const auto out = kWork / "detect";
    REQUIRE(run("detect --config " + cfg.string() + " --out " + out.string() + " --seed 7") == 0);
    const auto report = dpe::report_from_json(nlohmann::json::parse(slurp(out / "detection.json")));
    CHECK(report.effective_lengths == std::vector<std::int64_t>{2048, 1024, 4096, 131072, 8192, 16384, 65536, 32768});
    CHECK(report.metadata.seed == 7);
    CHECK(first_line(out / "detection.csv") == "group,t,accuracy,rank");
    CHECK(slurp(out / "detection.svg").rfind("<svg", 0) == 0);

    const auto first = slurp(out / "detection.json");
    const auto first_csv = slurp(out / "detection.csv");
    REQUIRE(run("detect --config " + cfg.string() + " --out " + out.string() + " --seed 7") == 0);
    CHECK(slurp(out / "detection.json") == first);
    CHECK(slurp(out / "detection.csv") == first_csv);

    const auto empty = config("empty.json", "{\"detect_grid\":[]}");
    CHECK(run("detect --config " + empty.string() + " --out " + out.string()) == 2);
}

TEST_CASE("cli analyze-norms: zeros, fixture activations, bad magic") {
    const auto dir = kWork / "norms";
    fs::create_directories(dir);
    dpe::write_tensor(dir / "zq.dpet", dpe::to_tensor_data(dpe::Tensor3(2, 4, 8)));
    dpe::write_tensor(dir / "zk.dpet", dpe::to_tensor_data(dpe::Tensor3(2, 4, 8)));
    REQUIRE(run("analyze-norms --queries " + (dir / "zq.dpet").string() + " --keys " + (dir / "zk.dpet").string() +
                " --out " + dir.string()) == 0);
    const auto csv = slurp(dir / "norms.csv");
    CHECK(first_line(dir / "norms.csv") == "head,pair,score");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(line.substr(line.rfind(',') + 1) == "0");
    }
    CHECK(rows == 8);

    const auto fx = kWork / "norms_fx";
    REQUIRE(run("analyze-norms --from-fixture --out " + fx.string()) == 0);
    const auto q = dpe::to_tensor3(dpe::read_tensor(fx / "queries.dpet"));
    const auto k = dpe::to_tensor3(dpe::read_tensor(fx / "keys.dpet"));
    CHECK(slurp(fx / "norms.csv") == dpe::norms_csv(dpe::collect_norms(q, k)));
    CHECK(slurp(fx / "norms.svg").rfind("<svg", 0) == 0);

    std::ofstream(dir / "bad.dpet") << "NOPE1garbagegarbage";
    CHECK(run("analyze-norms --queries " + (dir / "bad.dpet").string() + " --keys " + (dir / "zk.dpet").string() +
              " --out " + dir.string()) == 3);
    auto bytes = dpe::encode_tensor(dpe::to_tensor_data(dpe::Tensor3(1, 2, 4)));
    bytes[12] ^= 0x40;
    std::ofstream(dir / "crc.dpet", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    CHECK(run("analyze-norms --queries " + (dir / "crc.dpet").string() + " --keys " + (dir / "zk.dpet").string() +
              " --out " + dir.string()) == 3);
}

TEST_CASE("cli eval: control run and unknown baseline") {
    const auto cfg = config("eval.json", "{\"fixture\":{\"train_length\":256,\"target_length\":256,\"samples\":4}}");
    const auto out = kWork / "eval";
    REQUIRE(run("eval --config " + cfg.string() + " --out " + out.string() + " --methods standard,rerope") == 0);
    CHECK(first_line(out / "eval.csv") == "method,context_length,correct,total,accuracy");
    const auto bad = config("evalbad.json", "{\"baseline\":\"longrope\"}");
    CHECK(run("eval --config " + bad.string() + " --out " + out.string()) == 2);
    CHECK(run("eval --config " + cfg.string() + " --out " + out.string() + " --methods standard,bogus") == 2);
}

TEST_CASE("cli bench and usage errors") {
    const auto out = kWork / "bench";
    REQUIRE(run("bench --lengths 128 --heads 1 --head-dim 32 --repeats 1 --out " + out.string()) == 0);
    CHECK(first_line(out / "bench.csv") == "engine,L,H,d,tile,mean_ms,std_ms,peak_bytes");
    CHECK(first_line(out / "overhead.csv") == "L,standard_ms,dpe_ms,ratio,cv_standard,cv_dpe");
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("plan --format xml") == 2);
    CHECK(run("plan --config /nonexistent/config.json") == 2);
    CHECK(run("--help") == 0);
}
