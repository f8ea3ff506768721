#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fbcap/cli.hpp"
#include "json.hpp"

using namespace fbcap;
using namespace fbcap::cli;
namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("fbcap_cli_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir / name;
        std::ofstream(p) << text;
        return p;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct Run {
    int code;
    std::string out, err;
};

Run run_cli(std::initializer_list<const char*> args) {
    std::vector<const char*> argv{"fbcap"};
    argv.insert(argv.end(), args);
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const char* kWhiteSpec = R"({"f": [], "g": [], "noise_variance": 1, "power": 3})";
const char* kMaSpec = R"({"f": [], "g": [-0.5], "noise_variance": 1, "power": 0.5555555555555556})";
const char* kArSpec = R"({"f": [0.5], "g": [], "noise_variance": 1, "power": 5.333333333333333})";

}  // namespace

TEST_CASE("parse_channel_spec") {
    const ChannelSpecFile s = parse_channel_spec(R"({"f":[0.5],"g":[],"noise_variance":2,"power":1})");
    CHECK(s.f == std::vector<double>{0.5});
    CHECK(s.g.empty());
    CHECK(s.noise_variance == 2.0);
    CHECK(s.c == 1.0);
    CHECK(parse_channel_spec(R"({"f":[],"g":[],"noise_variance":1,"power":1,"c":0.5})").c == 0.5);

    CHECK_THROWS_AS(parse_channel_spec("{not json"), SpecFormatError);
    CHECK_THROWS_AS(parse_channel_spec("[1, 2]"), SpecFormatError);
    CHECK_THROWS_AS(parse_channel_spec(R"({"f":[],"g":[],"noise_variance":1})"), SpecFormatError);
    CHECK_THROWS_AS(parse_channel_spec(R"({"f":[],"g":[],"noise_variance":1,"power":1,"extra":0})"),
                    SpecFormatError);
    CHECK_THROWS_AS(parse_channel_spec(R"({"f":"x","g":[],"noise_variance":1,"power":1})"), SpecFormatError);
    CHECK_THROWS_AS(parse_channel_spec(R"({"f":[],"g":[true],"noise_variance":1,"power":1})"), SpecFormatError);
}

TEST_CASE("format_number") {
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(0.5849625007211562) == "0.584962501");
    CHECK(format_number(1e-20) == "1e-20");
    CHECK(format_number(-2.8879039357514142) == "-2.88790394");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("sweep_grid") {
    SweepOptions lin;
    lin.power_min = 1.0;
    lin.power_max = 3.0;
    lin.points = 3;
    CHECK(sweep_grid(lin) == std::vector<double>{1.0, 2.0, 3.0});

    SweepOptions log = lin;
    log.power_max = 100.0;
    log.log_spacing = true;
    const auto g = sweep_grid(log);
    REQUIRE(g.size() == 3);
    CHECK(g[1] == doctest::Approx(10.0));
    CHECK(g[2] == 100.0);

    SweepOptions bad = lin;
    bad.points = 1;
    CHECK_THROWS_AS(sweep_grid(bad), InvalidInput);
    bad = lin;
    bad.power_min = 0.0;
    CHECK_THROWS_AS(sweep_grid(bad), InvalidInput);
    bad = lin;
    bad.power_max = 0.5;
    CHECK_THROWS_AS(sweep_grid(bad), InvalidInput);
}

TEST_CASE("validate command") {
    Scratch s;
    CHECK(run_cli({"validate", s.write("ok.json", R"({"f":[0.5],"g":[],"noise_variance":1,"power":1})").c_str()})
              .code == kExitOk);

    const Run bad = run_cli({"validate", s.write("ma.json", R"({"f":[],"g":[1.5],"noise_variance":1,"power":1})").c_str()});
    CHECK(bad.code == kExitInvalidSpec);
    CHECK((bad.out + bad.err).find("MA root -1.5") != std::string::npos);

    CHECK(run_cli({"validate", s.write("broken.json", "{\"f\": [").c_str()}).code == kExitInvalidSpec);
    CHECK(run_cli({"validate", (s.dir / "missing.json").c_str()}).code == kExitInvalidSpec);
    CHECK(run_cli({"capacity", s.write("neg.json", R"({"f":[],"g":[],"noise_variance":1,"power":-1})").c_str()})
              .code == kExitInvalidSpec);
}

TEST_CASE("capacity command") {
    Scratch s;
    const Run white = run_cli({"capacity", s.write("w.json", kWhiteSpec).c_str()});
    CHECK(white.code == kExitOk);
    CHECK(white.out.find("capacity_bits   1\n") != std::string::npos);

    const Run ma = run_cli({"capacity", "--json", s.write("ma.json", kMaSpec).c_str()});
    REQUIRE(ma.code == kExitOk);
    const auto j = nlohmann::json::parse(ma.out);
    std::set<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.insert(k);
    CHECK(keys == std::set<std::string>{"a_bar", "capacity_bits", "variant", "loop_verdict", "achieved_power",
                                         "power", "snr", "residual", "real_roots", "kim_bits"});
    CHECK(j["a_bar"].get<double>() == 1.5);
    CHECK(j["capacity_bits"].get<double>() == doctest::Approx(0.584963).epsilon(1e-6));
    CHECK(j["loop_verdict"] == "stable");
    CHECK(j["variant"] == "plain");

    const Run ar = run_cli({"capacity", "--json", s.write("ar.json", kArSpec).c_str()});
    const auto ja = nlohmann::json::parse(ar.out);
    CHECK(std::abs(ja["capacity_bits"].get<double>() - 1.5301) < 1e-3);
    CHECK(ja["loop_verdict"] == "unstable");
    CHECK(ja["variant"] == "flipped");

    const auto j2 = nlohmann::json::parse(
        run_cli({"capacity", "--json", s.write("ar2.json", R"({"f":[0.5,0.1],"g":[],"noise_variance":1,"power":1})")
                                           .c_str()})
            .out);
    CHECK(j2["kim_bits"].is_null());
}

TEST_CASE("sweep command") {
    Scratch s;
    const fs::path white = s.write("w.json", R"({"f":[],"g":[],"noise_variance":1,"power":1})");
    const Run r = run_cli({"sweep", white.c_str(), "--powers", "15,1,3"});
    CHECK(r.code == kExitOk);
    CHECK(r.out ==
          "power,snr,a_bar,variant,capacity_bits,kim_bits,loop_verdict\n"
          "1,1,1.41421356,plain,0.5,0.5,stable\n"
          "3,3,2,plain,1,1,stable\n"
          "15,15,4,plain,2,2,stable\n");

    const fs::path csv = s.dir / "sweep.csv";
    const fs::path ma = s.write("ma.json", kMaSpec);
    CHECK(run_cli({"sweep", ma.c_str(), "--power-min", "0.1", "--power-max", "50", "--points", "25", "--log-spacing",
                   "--out", csv.c_str()})
              .code == kExitOk);
    std::istringstream lines(slurp(csv));
    std::string line;
    std::getline(lines, line);
    CHECK(line == kSweepHeader);
    double prev_power = 0.0, prev_bits = -1.0;
    int rows = 0;
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        const double power = std::stod(cells[0]), bits = std::stod(cells[4]), kim = std::stod(cells[5]);
        CHECK(power > prev_power);
        CHECK(bits >= prev_bits);
        CHECK(std::abs(kim - bits) < 1e-8);
        prev_power = power;
        prev_bits = bits;
        ++rows;
    }
    CHECK(rows == 25);

    CHECK(run_cli({"sweep", ma.c_str(), "--power-min", "3", "--power-max", "1"}).code == kExitInvalidSpec);

    // second-order spec: kim_bits column left empty
    const fs::path ar2 = s.write("ar2.json", R"({"f":[0.5,0.1],"g":[],"noise_variance":1,"power":1})");
    const Run second = run_cli({"sweep", ar2.c_str(), "--powers", "1,2"});
    CHECK(second.code == kExitOk);
    std::istringstream rows2(second.out);
    std::getline(rows2, line);
    while (std::getline(rows2, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        CHECK(cells[5].empty());
    }
}

TEST_CASE("simulate command") {
    Scratch s;
    const fs::path ma = s.write("ma.json", kMaSpec);
    const fs::path trace = s.dir / "trace.csv";
    const Run r = run_cli({"simulate", ma.c_str(), "--samples", "2000", "--seed", "9", "--out", trace.c_str()});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    std::set<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.insert(k);
    CHECK(keys == std::set<std::string>{"mode", "a_bar", "plant_a", "seed", "samples_used", "input_power",
                                         "innovation_variance", "whiteness_max_corr", "predicted_input_power",
                                         "diverged", "diverged_at"});
    CHECK(j["mode"] == "colored");
    CHECK(j["diverged"] == false);
    CHECK(j["diverged_at"].is_null());
    CHECK(j["samples_used"] == 2000);

    const std::string first = slurp(trace);
    CHECK(first.rfind(std::string(kTraceHeader) + "\n", 0) == 0);
    CHECK(std::count(first.begin(), first.end(), '\n') == 2001);
    const Run again = run_cli({"simulate", ma.c_str(), "--samples", "2000", "--seed", "9", "--out", trace.c_str()});
    CHECK(again.out == r.out);
    CHECK(slurp(trace) == first);

    const Run w = run_cli({"simulate", s.write("w.json", kWhiteSpec).c_str(), "--mode", "whitened"});
    REQUIRE(w.code == kExitOk);
    CHECK(std::abs(nlohmann::json::parse(w.out)["innovation_variance"].get<double>() / 4.0 - 1.0) < 0.02);

    const Run ar = run_cli({"simulate", s.write("ar.json", kArSpec).c_str(), "--samples", "1000"});
    CHECK(ar.code == kExitDiverged);
    const auto ja = nlohmann::json::parse(ar.out);
    CHECK(ja["diverged"] == true);
    CHECK(ja["diverged_at"].is_number_integer());

    CHECK(run_cli({"simulate", ma.c_str(), "--mode", "sideways"}).code == kExitInvalidSpec);
}

TEST_CASE("verify command") {
    Scratch s;
    const Run white = run_cli({"verify", s.write("w.json", kWhiteSpec).c_str()});
    CHECK(white.code == kExitOk);
    CHECK(white.out.find("FAIL") == std::string::npos);
    CHECK(white.out.find("rate_integral") != std::string::npos);

    const Run ma = run_cli({"verify", s.write("ma.json", kMaSpec).c_str()});
    CHECK(ma.code == kExitOk);
    CHECK(ma.out.find("loop_stability              INFO  stable") != std::string::npos);

    const Run ar = run_cli({"verify", s.write("ar.json", kArSpec).c_str()});
    CHECK(ar.code == kExitOk);
    CHECK(ar.out.find("FAIL") == std::string::npos);
    CHECK(ar.out.find("unstable") != std::string::npos);
}

TEST_CASE("argument handling and the installed binary") {
    CHECK(run_cli({}).code == kExitInvalidSpec);
    CHECK(run_cli({"frobnicate"}).code == kExitInvalidSpec);
    CHECK(run_cli({"--help"}).code == kExitOk);

    Scratch s;
    const fs::path ar = s.write("ar.json", kArSpec);
    const std::string cmd = std::string(FBCAP_EXE) + " simulate " + ar.string() + " --samples 500 > " +
                            (s.dir / "out.json").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == kExitDiverged);
}
