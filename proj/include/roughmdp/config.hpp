#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "roughmdp/coefficients.hpp"
#include "roughmdp/rde.hpp"

namespace roughmdp::mdp {

enum class ZPath { DifferenceQuotient, PhiDilated };

struct EventSpec {
  Eigen::VectorXd direction;
  double threshold = 1.0;
};

/// Named builtin coefficient field plus its parameters. Parameters are kept
/// as JSON so the config hash covers them verbatim.
struct CoefficientSpec {
  std::string name = "linear";
  int dim_d = 1;
  int dim_e = 1;
  nlohmann::json params; // null means builtin defaults

  rde::CoefficientField build() const;
};

/// Everything one experiment run depends on. Strict JSON: unknown keys are
/// rejected anywhere in the document.
struct ExperimentConfig {
  int version = 1;
  CoefficientSpec coefficients;
  Eigen::VectorXd initial_point; // defaults to zeros(e)
  double hurst = 0.5;
  int grid_level = 8;
  rde::KappaSpec kappa;                                    // default power(0.4)
  std::vector<double> eps_grid = {0.5, 0.35, 0.25, 0.18, 0.12};
  int n_paths = 1000;
  EventSpec event; // default direction e_1, threshold 1
  std::uint64_t seed = 0;
  ZPath z_path = ZPath::DifferenceQuotient;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Field/shape checks shared by every subcommand.
  void validate_core() const;
  /// Full experiment contract: eps grid, kappa monotonicity, n_paths >= 100.
  void validate() const;
  /// Batch sampling only needs n_paths >= 1 on top of the core checks.
  void validate_sampling() const;

  std::string hash() const; // fnv1a64 of the canonical JSON dump
};

} // namespace roughmdp::mdp
