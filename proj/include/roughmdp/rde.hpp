#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "roughmdp/coefficients.hpp"
#include "roughmdp/grid.hpp"
#include "roughmdp/roughpath.hpp"

namespace roughmdp::rde {

/// Grid function with values per node (rows = nodes).
struct Trajectory {
  TimeGrid grid;
  Eigen::MatrixXd values;

  int dim() const { return static_cast<int>(values.cols()); }
  void write_csv(std::ostream& os) const;
};

/// The deviation scale kappa: either the power family kappa(eps) = eps^-theta
/// or a user table evaluated by exact lookup / linear interpolation.
/// By convention eps_kappa(0) = 0.
class KappaSpec {
public:
  KappaSpec() : KappaSpec(power(0.4)) {}

  static KappaSpec power(double theta);
  static KappaSpec table(std::vector<double> eps, std::vector<double> kappa);

  double operator()(double eps) const;
  double eps_kappa(double eps) const;

  bool is_power() const { return is_power_; }
  double theta() const { return theta_; }
  const std::vector<double>& table_eps() const { return eps_; }
  const std::vector<double>& table_kappa() const { return kappa_; }

  /// Checks positivity and the monotonicity requirements (kappa non-increasing
  /// in eps, eps*kappa(eps) non-decreasing in eps) on the given grid.
  void validate_on(const std::vector<double>& eps_grid) const;

private:
  KappaSpec(bool is_power, double theta, std::vector<double> eps, std::vector<double> kappa)
      : is_power_(is_power), theta_(theta), eps_(std::move(eps)), kappa_(std::move(kappa)) {}

  bool is_power_;
  double theta_ = 0.0;
  std::vector<double> eps_;
  std::vector<double> kappa_;
};

/// dy = b(y) dt, classical 4th-order steps on the grid.
Trajectory solve_base_ode(const CoefficientField& coeff, const Eigen::VectorXd& a,
                          const TimeGrid& grid);

/// dy = b(y) dt + eps * sigma(y) dx via the one-step increment-Taylor scheme:
/// per interval the drift advances with the same 4th-order step as
/// solve_base_ode and the noise contracts sigma and its iterated
/// vector-field derivatives against the scaled level-1..depth tensors.
/// eps = 0 and sigma = 0 reproduce solve_base_ode exactly.
Trajectory solve_rde(const CoefficientField& coeff, const Eigen::VectorXd& a,
                     const roughpath::RoughPathLift& x, double eps, const TimeGrid& grid);

/// int_0^1 grad_b(y0 + theta*u*z) <z> dtheta by fixed 8-point Gauss-Legendre
/// (exact for polynomial integrands up to degree 15 in theta).
Eigen::VectorXd theta_drift(const CoefficientField& coeff, const Eigen::VectorXd& y0,
                            const Eigen::VectorXd& z, double u);

/// The coupled 2e-dimensional system
///   dy = b(y) dt,                                    y_0 = a
///   dz = [theta-averaged drift] dt + sigma(y + u z) dx,  z_0 = 0,  u = eps*kappa(eps),
/// stepped with the same scheme as solve_rde. The block diffusion has zero
/// y-component, so its iterated derivative terms reduce to the flat ones
/// evaluated at y + u z and scaled by u^(level-1).
std::pair<Trajectory, Trajectory> solve_coupled_system(const CoefficientField& coeff,
                                                       const Eigen::VectorXd& a,
                                                       const roughpath::RoughPathLift& x,
                                                       double eps, const KappaSpec& kappa,
                                                       const TimeGrid& grid);

/// The deviation map: z-component of solve_coupled_system.
Trajectory phi_map(const CoefficientField& coeff, const Eigen::VectorXd& a, double eps,
                   const roughpath::RoughPathLift& x, const KappaSpec& kappa,
                   const TimeGrid& grid);

/// (y_eps - y_0) / (eps * kappa(eps)); eps must be positive.
Trajectory z_from_solutions(const Trajectory& y_eps, const Trajectory& y_0, double eps,
                            const KappaSpec& kappa);

/// Drift with the scaled Ito-Stratonovich correction removed:
///   b~_i = b_i - (eps^2/2) sum_{j,k} sigma_kj d_k sigma_ij,
/// derivatives adjusted consistently, sigma unchanged.
CoefficientField ito_drift_correction(const CoefficientField& coeff, double eps);

} // namespace roughmdp::rde
