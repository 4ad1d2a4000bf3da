#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kCli = ROUGHMDP_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "roughmdp_cli_stdout.txt";
  const std::string cmd = std::string(kCli) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream buf;
  buf << in.rdbuf();
  return {WEXITSTATUS(status), buf.str()};
}

fs::path write_config(const json& j, const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json minimal_config() {
  json cfg;
  cfg["version"] = 1;
  cfg["hurst"] = 0.5;
  cfg["grid_level"] = 8;
  cfg["n_paths"] = 10;
  cfg["seed"] = 7;
  return cfg;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

} // namespace

TEST_CASE("cmd_sample writes deterministic artifacts") {
  const auto cfg = write_config(minimal_config(), "sample_cfg.json");
  const auto out1 = fresh_dir("roughmdp_sample1");
  const auto out2 = fresh_dir("roughmdp_sample2");

  CHECK(run_cli("sample --config " + cfg.string() + " --out " + out1.string()).exit_code == 0);
  CHECK(run_cli("sample --config " + cfg.string() + " --out " + out2.string()).exit_code == 0);

  REQUIRE(fs::exists(out1 / "fbm.csv"));
  REQUIRE(fs::exists(out1 / "lift.csv"));
  CHECK(slurp(out1 / "fbm.csv") == slurp(out2 / "fbm.csv"));
  CHECK(slurp(out1 / "lift.csv") == slurp(out2 / "lift.csv"));

  const json manifest = json::parse(slurp(out1 / "manifest.json"));
  CHECK(manifest.at("artifacts").size() == 2);
  CHECK(manifest.at("artifacts") == json::parse(slurp(out2 / "manifest.json")).at("artifacts"));
}

TEST_CASE("validation failures exit with code 2 and name the field") {
  auto bad = minimal_config();
  bad["hurst"] = 0.6;
  const auto cfg = write_config(bad, "bad_hurst.json");
  const auto res = run_cli("sample --config " + cfg.string() + " --out " +
                           fresh_dir("roughmdp_bad").string());
  CHECK(res.exit_code == 2);

  auto unknown = minimal_config();
  unknown["grid_levle"] = 4;
  const auto cfg2 = write_config(unknown, "bad_key.json");
  CHECK(run_cli("sample --config " + cfg2.string() + " --out " +
                fresh_dir("roughmdp_bad2").string())
            .exit_code == 2);

  CHECK(run_cli("clt --config /nonexistent/path.json").exit_code == 4);
}

TEST_CASE("numeric failures exit with code 3") {
  // sigma = 0 makes the terminal variance degenerate
  auto cfg = minimal_config();
  cfg["grid_level"] = 4;
  cfg["coefficients"] = {{"name", "linear"},
                         {"d", 1},
                         {"e", 1},
                         {"params",
                          {{"A", json::array({json::array({-0.5})})},
                           {"c", json::array({0.0})},
                           {"sigma0", json::array({json::array({0.0})})}}}};
  const auto path = write_config(cfg, "degenerate.json");
  CHECK(run_cli("rate --config " + path.string()).exit_code == 3);
}

TEST_CASE("cmd_rate prints the closed-form value for the identity case") {
  auto cfg = minimal_config();
  cfg["grid_level"] = 5;
  cfg["coefficients"] = {{"name", "linear"},
                         {"d", 1},
                         {"e", 1},
                         {"params",
                          {{"A", json::array({json::array({0.0})})},
                           {"c", json::array({0.0})},
                           {"sigma0", json::array({json::array({1.0})})}}}};
  cfg["event"] = {{"direction", json::array({1.0})}, {"threshold", 1.0}};
  const auto path = write_config(cfg, "rate_cfg.json");
  const auto res = run_cli("rate --config " + path.string());
  CHECK(res.exit_code == 0);
  CHECK(std::stod(res.stdout_text) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("clt run emits a single-row report for a one-point eps grid") {
  auto cfg = minimal_config();
  cfg["grid_level"] = 5;
  cfg["n_paths"] = 200;
  cfg["eps_grid"] = json::array({0.4});
  const auto path = write_config(cfg, "clt_one.json");
  const auto out = fresh_dir("roughmdp_clt_one");
  CHECK(run_cli("clt --config " + path.string() + " --out " + out.string()).exit_code == 0);

  const std::string csv = slurp(out / "report.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2); // header + one row

  const json rep = json::parse(slurp(out / "report.json"));
  CHECK(rep.at("kind") == "clt");
  CHECK(rep.at("records").size() == 1);

  // artifacts deterministic under --seed override as well
  const auto out2 = fresh_dir("roughmdp_clt_one_b");
  CHECK(run_cli("clt --config " + path.string() + " --out " + out2.string() + " --seed 7")
            .exit_code == 0);
  CHECK(slurp(out / "report.json") == slurp(out2 / "report.json"));
}

TEST_CASE("golden mdp run is byte-identical across thread counts") {
  const fs::path golden_dir(ROUGHMDP_GOLDEN_DIR);
  const auto cfg = golden_dir / "mdp_golden.json";
  REQUIRE(fs::exists(cfg));

  std::string first;
  for (int threads : {1, 4}) {
    const auto out = fresh_dir("roughmdp_golden_t" + std::to_string(threads));
    CHECK(run_cli("mdp --config " + cfg.string() + " --out " + out.string() + " --threads " +
                  std::to_string(threads))
              .exit_code == 0);
    const std::string body = slurp(out / "report.csv") + slurp(out / "report.json");
    if (first.empty())
      first = body;
    else
      CHECK(first == body);
  }
}
