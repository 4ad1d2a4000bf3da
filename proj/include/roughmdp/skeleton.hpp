#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "roughmdp/fbm.hpp"
#include "roughmdp/rde.hpp"

namespace roughmdp::skeleton {

/// Solution of dM = grad_b(y0_t) M dt with M_0 = Id, together with its
/// inverse obtained from the adjoint equation dN = -N grad_b(y0_t) dt
/// (never by matrix inversion) and cross-checked node by node.
struct FundamentalMatrix {
  TimeGrid grid;
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> m_inv;
};

FundamentalMatrix solve_fundamental_matrix(const rde::CoefficientField& coeff,
                                           const rde::Trajectory& y0);

/// Linear response to a smooth driver h (rows = nodes, h_0 = 0), computed by
/// variation of constants with the left-point rule:
///   Xi_t = M_t sum_{s_i < t} M_{s_i}^{-1} sigma(y0_{s_i}) (h_{s_{i+1}} - h_{s_i}).
rde::Trajectory solve_skeleton_ode(const rde::CoefficientField& coeff,
                                   const rde::Trajectory& y0, const Eigen::MatrixXd& h);

/// Law of the limiting mean-zero Gaussian process on the grid. `covariance`
/// is (nodes*e) x (nodes*e), node-major; `terminal_covariance` is the e x e
/// block at t = 1.
struct LimitLaw {
  TimeGrid grid;
  int dim_e = 1;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd terminal_covariance;

  void write_csv(std::ostream& os) const;
};

/// Cov(Xi_s, Xi_t) = sum_{i,j} F(s, s_i) Gamma_ij F(t, s_j)^T with
/// F(t,s) = 1_{s<t} M_t M_s^{-1} sigma(y0_s) and Gamma the per-coordinate
/// increment covariance (driver coordinates independent and identical).
LimitLaw limit_covariance(const rde::CoefficientField& coeff, const rde::Trajectory& y0,
                          const TimeGrid& grid, fbm::HurstParam h);

/// Rate of the terminal half-space event {<direction, xi_1> >= z}: by
/// linearity of the response map this collapses to the one-dimensional
/// Gaussian value z^2 / (2 v), v = direction' terminal_covariance direction.
double terminal_rate(const LimitLaw& limit, const Eigen::VectorXd& direction, double z);

} // namespace roughmdp::skeleton
