#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "roughmdp/mdp.hpp"
#include "roughmdp/rng.hpp"

using namespace roughmdp;
using nlohmann::json;

namespace {

json identity_config(int n_paths, std::vector<double> eps) {
  json cfg;
  cfg["version"] = 1;
  cfg["coefficients"] = {{"name", "linear"},
                         {"d", 1},
                         {"e", 1},
                         {"params",
                          {{"A", json::array({json::array({0.0})})},
                           {"c", json::array({0.0})},
                           {"sigma0", json::array({json::array({1.0})})}}}};
  cfg["hurst"] = 0.5;
  cfg["grid_level"] = 5;
  cfg["eps_grid"] = eps;
  cfg["n_paths"] = n_paths;
  cfg["event"] = {{"direction", json::array({1.0})}, {"threshold", 1.0}};
  cfg["seed"] = 20240;
  return cfg;
}

} // namespace

TEST_CASE("normal cdf sanity") {
  CHECK(mdp::normal_cdf(0.0) == 0.5);
  CHECK(mdp::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(mdp::normal_tail(1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
}

TEST_CASE("estimate_tail_rate") {
  SUBCASE("all samples above the threshold") {
    std::vector<double> s(50, 2.0);
    const auto est = mdp::estimate_tail_rate(s, 1.0, 1.0);
    CHECK(est.p_hat == 1.0);
    CHECK(est.rate == 0.0);
    CHECK_FALSE(est.zero_hits);
  }

  SUBCASE("half the samples above, kappa = 1") {
    std::vector<double> s;
    for (int i = 0; i < 100; ++i) s.push_back(i < 50 ? 2.0 : 0.0);
    const auto est = mdp::estimate_tail_rate(s, 1.0, 1.0);
    CHECK(est.p_hat == 0.5);
    CHECK(est.rate == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(est.ci_lo < est.rate);
    CHECK(est.rate < est.ci_hi);
  }

  SUBCASE("no hits: infinite sentinel, flagged") {
    std::vector<double> s(200, 0.0);
    const auto est = mdp::estimate_tail_rate(s, 1.0, 2.0);
    CHECK(est.p_hat == 0.0);
    CHECK(std::isinf(est.rate));
    CHECK(est.zero_hits);
    CHECK(est.unreliable);
    CHECK(std::isinf(est.ci_hi));
    CHECK(est.ci_lo > 0.0); // Wilson lower end still informative
  }

  SUBCASE("kappa scaling divides the rate by kappa^2") {
    std::vector<double> s;
    for (int i = 0; i < 100; ++i) s.push_back(i < 50 ? 2.0 : 0.0);
    const auto est = mdp::estimate_tail_rate(s, 1.0, 2.0);
    CHECK(est.rate == doctest::Approx(std::log(2.0) / 4.0).epsilon(1e-15));
  }

  SUBCASE("bad arguments rejected") {
    std::vector<double> s(10, 0.0);
    CHECK_THROWS_AS(mdp::estimate_tail_rate(s, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(mdp::estimate_tail_rate(std::vector<double>{}, 1.0, 1.0), ValidationError);
  }
}

TEST_CASE("ks distance") {
  SUBCASE("constant samples at zero against sigma = 1") {
    CHECK(mdp::ks_distance(std::vector<double>(100, 0.0), 1.0) == 0.5);
  }

  SUBCASE("location-scale invariance") {
    RandomSubstream rng(5, 0, 0);
    std::vector<double> s(500);
    for (auto& x : s) x = rng.next_gaussian();
    const double base = mdp::ks_distance(s, 1.0);
    std::vector<double> doubled = s;
    for (auto& x : doubled) x *= 2.0;
    CHECK(mdp::ks_distance(doubled, 2.0) == base); // power-of-two scale is exact
    std::vector<double> tripled = s;
    for (auto& x : tripled) x *= 3.0;
    CHECK(mdp::ks_distance(tripled, 3.0) == doctest::Approx(base).epsilon(1e-12));
  }

  SUBCASE("true normal samples pass the 1% critical value") {
    const int n = 10000;
    RandomSubstream rng(8, 1, 0);
    std::vector<double> s(n);
    for (auto& x : s) x = 1.7 * rng.next_gaussian();
    CHECK(mdp::ks_distance(s, 1.7) < 1.6276 / std::sqrt(static_cast<double>(n)));
  }

  SUBCASE("bad sigma rejected") {
    CHECK_THROWS_AS(mdp::ks_distance(std::vector<double>(10, 0.0), 0.0), ValidationError);
  }
}

TEST_CASE("config parsing is strict") {
  json cfg = identity_config(500, {0.5});

  SUBCASE("round trip") {
    const auto parsed = mdp::ExperimentConfig::from_json(cfg);
    const auto again = mdp::ExperimentConfig::from_json(parsed.to_json());
    CHECK(parsed.hash() == again.hash());
  }

  SUBCASE("unknown keys rejected by name") {
    cfg["n_pathz"] = 7;
    CHECK_THROWS_WITH_AS(static_cast<void>(mdp::ExperimentConfig::from_json(cfg)),
                         doctest::Contains("n_pathz"), ValidationError);
  }

  SUBCASE("invalid hurst names the field") {
    cfg["hurst"] = 0.6;
    CHECK_THROWS_WITH_AS(static_cast<void>(mdp::ExperimentConfig::from_json(cfg)),
                         doctest::Contains("hurst"), ValidationError);
  }

  SUBCASE("experiment validation enforces the harder contract") {
    auto parsed = mdp::ExperimentConfig::from_json(cfg);
    parsed.n_paths = 50;
    CHECK_THROWS_AS(parsed.validate(), ValidationError);
    CHECK_NOTHROW(parsed.validate_sampling());
    parsed.eps_grid = {0.3, 0.5};
    CHECK_THROWS_AS(parsed.validate(), ValidationError);
  }

  SUBCASE("version is required") {
    cfg.erase("version");
    CHECK_THROWS_AS(static_cast<void>(mdp::ExperimentConfig::from_json(cfg)), ValidationError);
  }
}

TEST_CASE("clt experiment on the identity case") {
  const auto cfg = mdp::ExperimentConfig::from_json(identity_config(2000, {0.5, 0.3}));
  const auto report = mdp::run_clt_experiment(cfg, 2);

  CHECK(report.kind == "clt");
  CHECK(report.limit_variance == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(report.reference_rate == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(report.sampler_method == "circulant_embedding");
  CHECK_FALSE(report.finite_difference_derivatives);
  REQUIRE(report.records.size() == 2);

  for (const auto& rec : report.records) {
    CHECK(rec.kappa == 1.0); // forced constant-1 table
    // Z^eps_1 is exactly standard normal here
    CHECK(rec.ks < 1.6276 / std::sqrt(2000.0));
    CHECK(std::abs(rec.proj_mean) < 4.0 / std::sqrt(2000.0));
    CHECK(rec.proj_var == doctest::Approx(1.0).epsilon(0.15));
    CHECK(rec.p_hat >= 0.0);
    CHECK(rec.p_hat <= 1.0);
  }
}

TEST_CASE("clt variance approaches the limit variance (linear drift)") {
  json cfg = identity_config(5000, {0.2});
  cfg["coefficients"]["params"]["A"] = json::array({json::array({-0.5})});
  const auto report =
      mdp::run_clt_experiment(mdp::ExperimentConfig::from_json(cfg), 2);
  const auto& rec = report.records.front();
  const double rel_se = std::sqrt(2.0 / 5000.0);
  CHECK(std::abs(rec.proj_var - report.limit_variance) <= 5.0 * rel_se * report.limit_variance);
  CHECK(std::abs(rec.proj_mean) <= 4.0 * std::sqrt(report.limit_variance / 5000.0));
}

TEST_CASE("both z computation paths agree in the report") {
  json base = identity_config(500, {0.4});
  base["coefficients"]["params"]["A"] = json::array({json::array({-0.4})});
  json phi = base;
  phi["z_path"] = "phi";
  const auto ra = mdp::run_mdp_experiment(mdp::ExperimentConfig::from_json(base), 2);
  const auto rb = mdp::run_mdp_experiment(mdp::ExperimentConfig::from_json(phi), 2);
  CHECK(std::abs(ra.records[0].proj_mean - rb.records[0].proj_mean) < 1e-8);
  CHECK(std::abs(ra.records[0].proj_var - rb.records[0].proj_var) < 1e-8);
  CHECK(ra.records[0].p_hat == rb.records[0].p_hat);
}

TEST_CASE("mdp experiment: wilson interval contains the exact normal tail") {
  // Identity case: <dir, Z^eps_1> = w_1 / kappa with w_1 standard normal.
  const auto cfg = mdp::ExperimentConfig::from_json(identity_config(20000, {0.5, 0.3}));
  const auto report = mdp::run_mdp_experiment(cfg, 2);
  REQUIRE(report.records.size() == 2);
  for (const auto& rec : report.records) {
    const double oracle_rate =
        -std::log(mdp::normal_tail(rec.kappa * 1.0)) / (rec.kappa * rec.kappa);
    CHECK(rec.ci_lo <= oracle_rate);
    CHECK(oracle_rate <= rec.ci_hi);
    CHECK(rec.n * rec.p_hat >= 20.0);
    CHECK(rec.flags.empty());
  }
}

TEST_CASE("mdp experiment flags a hopeless tail") {
  json cfg = identity_config(500, {0.5});
  cfg["event"]["threshold"] = 9.0; // hit probability ~ 1e-31
  const auto report = mdp::run_mdp_experiment(mdp::ExperimentConfig::from_json(cfg), 1);
  const auto& rec = report.records.front();
  CHECK(rec.p_hat == 0.0);
  CHECK(std::isinf(rec.rate));
  REQUIRE(rec.flags.size() == 2);
  CHECK(rec.flags[0] == "zero_hits");
  CHECK(rec.flags[1] == "unreliable_tail");

  std::ostringstream os;
  report.write_csv(os);
  CHECK(os.str().find("inf") != std::string::npos);
  CHECK(os.str().find("zero_hits|unreliable_tail") != std::string::npos);
  CHECK(report.to_json()["records"][0]["rate"] == "inf");
}

TEST_CASE("reports are bit-identical across thread counts") {
  json cfg = identity_config(600, {0.5, 0.35});
  cfg["coefficients"]["name"] = "tanh";
  cfg["coefficients"]["params"] = nullptr;
  cfg["hurst"] = 0.35; // depth-3 regime exercised too
  const auto parsed = mdp::ExperimentConfig::from_json(cfg);
  const auto r1 = mdp::run_mdp_experiment(parsed, 1);
  const auto r3 = mdp::run_mdp_experiment(parsed, 3);
  CHECK(r1.to_json().dump() == r3.to_json().dump());

  std::ostringstream c1, c3;
  r1.write_csv(c1);
  r3.write_csv(c3);
  CHECK(c1.str() == c3.str());
}

TEST_CASE("kappa table matching the power form yields the same records") {
  json p_cfg = identity_config(400, {0.5, 0.3});
  p_cfg["kappa"] = {{"form", "power"}, {"theta", 0.4}};
  const auto cfg_power = mdp::ExperimentConfig::from_json(p_cfg);

  json t_cfg = p_cfg;
  std::vector<double> eps = {0.5, 0.3};
  std::vector<double> kap;
  for (double e : eps) kap.push_back(std::pow(e, -0.4));
  t_cfg["kappa"] = {{"form", "table"}, {"eps", eps}, {"kappa", kap}};
  const auto cfg_table = mdp::ExperimentConfig::from_json(t_cfg);

  const auto rp = mdp::run_mdp_experiment(cfg_power, 2);
  const auto rt = mdp::run_mdp_experiment(cfg_table, 2);

  std::ostringstream a, b;
  rp.write_csv(a);
  rt.write_csv(b);
  CHECK(a.str() == b.str()); // identical per-eps tables
  CHECK(rp.config_hash != rt.config_hash);
}

TEST_CASE("report csv header") {
  mdp::ExperimentReport rep;
  rep.kind = "mdp";
  std::ostringstream os;
  rep.write_csv(os);
  CHECK(os.str() == "eps,kappa,n,p_hat,rate,ci_lo,ci_hi,ks,mean,var,flags\n");
}
