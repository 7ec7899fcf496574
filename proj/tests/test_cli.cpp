#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "flatmin/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kCli = FLATMIN_CLI_PATH;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("flatmin_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = kCli.string() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("trajectory run writes two 1500-row CSVs and a report") {
    TempDir tmp("traj");
    write(tmp.path / "c.json", R"({"kind":"trajectory","seed":1,"landscape":{"preset":"landscape-A"},
      "optimizers":[{"preset":"adam-default","label":"adam","alpha":0.1},{"preset":"miadam-simulation","label":"miadam1","alpha":0.1}]})");
    const auto out = tmp.path / "out";
    REQUIRE(run("run " + (tmp.path / "c.json").string() + " -o " + out.string(), tmp.path / "log") == 0);
    for (const char* f : {"trajectory_adam.csv", "trajectory_miadam1.csv"}) {
      const auto text = slurp(out / f);
      CHECK(std::count(text.begin(), text.end(), '\n') == 1501);
      CHECK(text.rfind("t,theta1,theta2,loss\n", 0) == 0);
    }
    const auto report = json::parse(slurp(out / "report.json"));
    CHECK(report["artifact_version"] == flatmin::kArtifactVersion);
    CHECK(report["config"]["kind"] == "trajectory");
    CHECK(report["metadata"]["convergence_radius_widths"] == 3.0);
    CHECK(report["results"]["optimizers"].size() == 2);
    CHECK(report.contains("wall_clock_seconds"));
  }

  TEST_CASE("rerun from report reproduces CSV bytes") {
    TempDir tmp("rerun");
    write(tmp.path / "c.json", R"({"kind":"regret","seed":9,"regret":{"horizon":2000},
      "optimizers":[{"name":"adam","alpha":0.1},{"name":"miadam","alpha":0.1}]})");
    const auto a = tmp.path / "a", b = tmp.path / "b";
    REQUIRE(run("run " + (tmp.path / "c.json").string() + " -o " + a.string(), tmp.path / "log") == 0);
    REQUIRE(run("run " + (a / "report.json").string() + " -o " + b.string(), tmp.path / "log") == 0);
    for (const char* f : {"regret_adam.csv", "regret_miadam.csv"}) {
      CHECK(slurp(a / f) == slurp(b / f));
      CHECK_FALSE(slurp(a / f).empty());
    }
    auto ra = json::parse(slurp(a / "report.json")), rb = json::parse(slurp(b / "report.json"));
    CHECK(ra["results"] == rb["results"]);
    ra["config"].erase("output_dir");
    rb["config"].erase("output_dir");
    CHECK(ra["config"] == rb["config"]);
  }

  TEST_CASE("unknown key fails without writing anything") {
    TempDir tmp("bad");
    write(tmp.path / "c.json", R"({"kind":"regret","optimizers":[{"name":"adam","alpah":0.1}]})");
    const auto out = tmp.path / "out";
    CHECK(run("run " + (tmp.path / "c.json").string() + " -o " + out.string(), tmp.path / "log") == 2);
    CHECK_FALSE(fs::exists(out));
    CHECK(slurp(tmp.path / "log").find("/optimizers/0/alpah") != std::string::npos);
  }

  TEST_CASE("malformed JSON reports the line") {
    TempDir tmp("syntax");
    write(tmp.path / "c.json", "{\n\"kind\": \"regret\",\n,\n}");
    CHECK(run("run " + (tmp.path / "c.json").string(), tmp.path / "log") == 2);
    CHECK(slurp(tmp.path / "log").find("line 3") != std::string::npos);
  }

  TEST_CASE("numeric failure reports the step") {
    TempDir tmp("diverge");
    write(tmp.path / "c.json", R"({"kind":"regret","regret":{"horizon":100},
      "optimizers":[{"name":"sgd","alpha":1e300}]})");
    const auto out = tmp.path / "out";
    CHECK(run("run " + (tmp.path / "c.json").string() + " -o " + out.string(), tmp.path / "log") == 3);
    CHECK(slurp(tmp.path / "log").find("step") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
  }

  TEST_CASE("escape-theory report carries both times and their ratio") {
    TempDir tmp("escape");
    write(tmp.path / "c.json", R"({"kind":"escape-theory","scenario":{"alpha":0.001,"beta1":0.9,"batch_size":128,
      "delta_L":0.1,"h_a_eigs":[10,2],"h_u_eigs":[-5,2],"rho":0.5,"t_tilde":4}})");
    const auto out = tmp.path / "out";
    REQUIRE(run("run " + (tmp.path / "c.json").string() + " -o " + out.string(), tmp.path / "log") == 0);
    const auto r = json::parse(slurp(out / "report.json"))["results"];
    CHECK(std::abs(r["phi_miadam1"]["value"].get<double>() / 6.72972606519365578911031384283e+93 - 1.0) < 1e-10);
    CHECK(r["phi_adam"]["overflowed"] == true);
    CHECK(r["phi_adam"]["value"].is_null());
    CHECK(r["log_ratio"].get<double>() == doctest::Approx(216.046948087737126757664516948 - 863.980423615289612508014501278));
  }

  TEST_CASE("presets listing") {
    TempDir tmp("presets");
    REQUIRE(run("presets --json", tmp.path / "out.json") == 0);
    const auto arr = json::parse(slurp(tmp.path / "out.json"));
    std::vector<std::string> names;
    for (const auto& p : arr) names.push_back(p["name"]);
    CHECK(names == std::vector<std::string>{"landscape-A", "landscape-B", "blobs-4c", "adam-default", "miadam-default",
                                            "miadam-label-noise", "miadam-simulation"});
    const auto& mi = arr[4]["values"];
    CHECK(mi["alpha"] == 1e-3);
    CHECK(mi["kappa"] == 0.98);
    CHECK(mi["weight_decay"] == 5e-5);
    CHECK(mi["switch_epochs"] == 20);
    CHECK(arr[6]["values"]["kappa"] == 0.885);
    CHECK(arr[6]["values"]["switch_step"] == 1400);

    REQUIRE(run("presets", tmp.path / "out.txt") == 0);
    const auto text = slurp(tmp.path / "out.txt");
    for (const auto& n : names) CHECK(text.find(n) != std::string::npos);
    CHECK(run("version", tmp.path / "v.txt") == 0);
    CHECK(run("", tmp.path / "none.txt") != 0);
  }
}
