#include <doctest.h>

#include "wayfind/cli.hpp"
#include "wayfind/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace wayfind;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("wayfind_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"synth", "--help"}).code == 0);
    CHECK(run({"--version"}).out.find(cli::kVersion) != std::string::npos);
    const auto none = run({});
    CHECK(none.code == 2);
    CHECK(none.err.starts_with("error: code=2"));
    CHECK(run({"net", "stats"}).code == 2);
    CHECK(run({"train", "--algo", "svm", "--data", "x", "--out", "y"}).code == 2);
    CHECK(run({"net", "stats", "--net", "x", "--bogus"}).code == 2);
}

TEST_CASE("input errors exit with status 2") {
    const auto dir = scratch("errors");
    io::write_text(dir / "bad.json", "{\n  \"format\": 1,\n  \"levels\": [1,\n}");
    const auto bad = run({"net", "validate", (dir / "bad.json").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("location=4") != std::string::npos);
    CHECK(bad.err.find('\n') == bad.err.size() - 1);

    CHECK(run({"net", "stats", (dir / "missing.json").string()}).code == 2);

    io::write_text(dir / "dangling.json",
                   R"({"format": 1, "levels": [1], "nodes": [{"id": "101", "level": 1, "kind": "corridor_junction", "x": 0, "y": 0}], "links": [{"a": "101", "b": "102", "kind": "same_level"}]})");
    const auto dangling = run({"net", "validate", (dir / "dangling.json").string()});
    CHECK(dangling.code == 2);
    CHECK(dangling.err.find("102") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("seed resolution") {
    const auto dir = scratch("seed");
    ::setenv("WAYFIND_SEED", "nope", 1);
    CHECK(run({"synth", "--agents", "2", "--out-dir", (dir / "a").string()}).code == 2);
    ::setenv("WAYFIND_SEED", "11", 1);
    REQUIRE(run({"synth", "--agents", "2", "--interval-ms", "200", "--out-dir", (dir / "env").string()}).code == 0);
    ::unsetenv("WAYFIND_SEED");
    REQUIRE(run({"--seed", "11", "synth", "--agents", "2", "--interval-ms", "200", "--out-dir", (dir / "flag").string()}).code == 0);
    REQUIRE(run({"synth", "--agents", "2", "--interval-ms", "200", "--out-dir", (dir / "default").string()}).code == 0);
    const auto gt = [&](const char* sub) { return io::read_text(dir / sub / "ground_truth.csv"); };
    CHECK(gt("env") == gt("flag"));
    CHECK(gt("env") != gt("default"));
    fs::remove_all(dir);
}

TEST_CASE("small pipeline") {
    const auto dir = scratch("pipeline");
    const auto p = [&](const char* name) { return (dir / name).string(); };
    REQUIRE(run({"synth", "--agents", "6", "--interval-ms", "100", "--noise", "0.2", "--out-dir", p("synth")}).code == 0);
    REQUIRE(run({"net", "validate", p("synth/network.json")}).code == 0);
    REQUIRE(run({"map", "--net", p("synth/network.json"), "--control-points", p("synth/control_points.csv"),
                 "--traj", p("synth/trajectories.csv"), "--out", p("seq.csv")})
                .code == 0);
    CHECK(io::parse_sequences(io::read_text(p("seq.csv"))) ==
          io::parse_sequences(io::read_text(p("synth/ground_truth.csv"))));
    REQUIRE(run({"featurize", "--sequences", p("seq.csv"), "--net", p("synth/network.json"), "--out", p("data.csv")})
                .code == 0);
    CHECK(fs::exists(p("data.train.csv")));
    CHECK(fs::exists(p("data.test.csv")));
    REQUIRE(run({"train", "--algo", "rf", "--data", p("data.train.csv"), "--out", p("rf.json")}).code == 0);
    const auto eval = run({"eval", "--model", p("rf.json"), "--data", p("data.test.csv"), "--group-by", "task",
                           "--out", p("report.json")});
    REQUIRE(eval.code == 0);
    CHECK(io::read_text(p("report.json")).find("balanced_accuracy") != std::string::npos);
    REQUIRE(run({"exp", "sweep", "--data", p("data.csv"), "--param", "max_depth", "--values", "2", "4", "--out",
                 p("sweep.csv")})
                .code == 0);
    CHECK(fs::exists(p("sweep.provenance.json")));
    const auto csv = io::read_text(p("sweep.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    // model of the wrong width
    REQUIRE(run({"featurize", "--sequences", p("seq.csv"), "--lag", "2", "--split-fraction", "0", "--out",
                 p("lag2.csv")})
                .code == 0);
    CHECK(run({"eval", "--model", p("rf.json"), "--data", p("lag2.csv")}).code != 0);
    fs::remove_all(dir);
}
