// roughmdp: build fractional Brownian rough drivers, solve the small-noise
// equations, and check the central-limit / moderate-deviation predictions
// by Monte Carlo. Subcommands: sample | clt | mdp | rate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "roughmdp/io.hpp"
#include "roughmdp/mdp.hpp"
#include "roughmdp/skeleton.hpp"

namespace fs = std::filesystem;
using roughmdp::IoError;
using roughmdp::NumericError;
using roughmdp::ValidationError;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("config is not valid JSON: ") + ex.what());
  }
  return j;
}

roughmdp::mdp::ExperimentConfig load_config(const CliOptions& opt) {
  auto cfg = roughmdp::mdp::ExperimentConfig::from_json(load_json(opt.config_path));
  if (opt.seed_override) cfg.seed = *opt.seed_override;
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string checksum_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot reopen artifact for checksum: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return roughmdp::io::fnv1a64_hex(buf.str());
}

void write_manifest(const fs::path& out_dir, const CliOptions& opt,
                    const roughmdp::mdp::ExperimentConfig& cfg,
                    const std::vector<fs::path>& artifacts) {
  nlohmann::json m;
  m["config_path"] = opt.config_path;
  m["out_dir"] = opt.out_dir;
  m["resolved_config"] = cfg.to_json();
  m["config_hash"] = cfg.hash();
  nlohmann::json sums;
  for (const auto& a : artifacts) sums[a.filename().string()] = checksum_file(a);
  m["artifacts"] = sums;
  write_file(out_dir / "manifest.json", m.dump(2) + "\n");
}

fs::path prepare_out_dir(const CliOptions& opt) {
  fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

int cmd_sample(const CliOptions& opt) {
  const auto cfg = load_config(opt);
  cfg.validate_sampling();
  const auto dir = prepare_out_dir(opt);

  const roughmdp::TimeGrid grid(cfg.grid_level);
  const roughmdp::fbm::HurstParam hurst(cfg.hurst);
  const int d = cfg.coefficients.dim_d;
  roughmdp::io::log_info("sampling " + std::to_string(cfg.n_paths) + " paths, d=" +
                         std::to_string(d) + ", level=" + std::to_string(cfg.grid_level));

  const auto batch = roughmdp::fbm::sample_fbm(grid, hurst, d, cfg.n_paths, cfg.seed);
  {
    std::ostringstream os;
    batch.write_csv(os);
    write_file(dir / "fbm.csv", os.str());
  }
  {
    // Lift dump of the first path in the batch, at the depth implied by H.
    const auto lift = roughmdp::roughpath::lift_piecewise_linear(
        grid, batch.paths.front(), roughmdp::roughpath::depth_for_hurst(hurst));
    std::ostringstream os;
    lift.write_csv(os);
    write_file(dir / "lift.csv", os.str());
  }
  write_manifest(dir, opt, cfg, {dir / "fbm.csv", dir / "lift.csv"});
  roughmdp::io::log_info("sampler method: " + roughmdp::fbm::to_string(batch.method));
  return kExitOk;
}

int cmd_experiment(const CliOptions& opt, const std::string& kind) {
  const auto cfg = load_config(opt);
  const auto dir = prepare_out_dir(opt);

  const auto report = kind == "clt" ? roughmdp::mdp::run_clt_experiment(cfg, opt.threads)
                                    : roughmdp::mdp::run_mdp_experiment(cfg, opt.threads);

  write_file(dir / "report.json", report.to_json().dump(2) + "\n");
  {
    std::ostringstream os;
    report.write_csv(os);
    write_file(dir / "report.csv", os.str());
  }
  {
    // Volatile run metadata lives outside the deterministic artifacts.
    nlohmann::json meta;
    meta["threads"] = opt.threads;
    meta["wall_seconds"] = report.wall_seconds;
    write_file(dir / "run_meta.json", meta.dump(2) + "\n");
  }
  write_manifest(dir, opt, cfg, {dir / "report.json", dir / "report.csv"});
  roughmdp::io::log_info(kind + " report written to " + dir.string());
  return kExitOk;
}

int cmd_rate(const CliOptions& opt) {
  const auto cfg = load_config(opt);
  cfg.validate_core();

  const roughmdp::TimeGrid grid(cfg.grid_level);
  const roughmdp::fbm::HurstParam hurst(cfg.hurst);
  const auto field = cfg.coefficients.build();
  const auto y0 = roughmdp::rde::solve_base_ode(field, cfg.initial_point, grid);
  const auto limit = roughmdp::skeleton::limit_covariance(field, y0, grid, hurst);
  const double rate =
      roughmdp::skeleton::terminal_rate(limit, cfg.event.direction, cfg.event.threshold);

  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", rate);
  std::cout << buf << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"rough-path Monte Carlo for small-noise limit theorems"};
  app.require_subcommand(1);

  CliOptions opt;
  for (auto* sub : {app.add_subcommand("sample", "write an fBm batch CSV and a lift dump"),
                    app.add_subcommand("clt", "run the central-limit experiment"),
                    app.add_subcommand("mdp", "run the moderate-deviation experiment"),
                    app.add_subcommand("rate", "print the terminal event rate")}) {
    sub->add_option("--config", opt.config_path, "JSON config path")->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed_override, "seed override");
    sub->add_option("--threads", opt.threads, "worker thread count")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
    app.exit(e);
    return kExitValidation;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    if (kind == "sample") return cmd_sample(opt);
    if (kind == "rate") return cmd_rate(opt);
    return cmd_experiment(opt, kind);
  } catch (const ValidationError& ex) {
    std::cerr << "validation error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& ex) {
    std::cerr << "numeric failure: " << ex.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& ex) {
    std::cerr << "io error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "io error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitNumeric;
  }
}
