#include "roughmdp/skeleton.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "roughmdp/io.hpp"

namespace roughmdp::skeleton {

FundamentalMatrix solve_fundamental_matrix(const rde::CoefficientField& coeff,
                                           const rde::Trajectory& y0) {
  const int e = coeff.dim_e;
  if (y0.dim() != e) throw ValidationError("y0 dimension does not match coefficient field");
  const TimeGrid grid = y0.grid;
  const double dt = grid.mesh();

  FundamentalMatrix out{grid, {}, {}};
  out.m.reserve(grid.n_nodes());
  out.m_inv.reserve(grid.n_nodes());

  // The state (y, M, N) is advanced jointly so the generator grad_b is
  // evaluated at the 4th-order substage values of y, not at interpolants.
  Eigen::VectorXd y = y0.values.row(0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(e, e);
  Eigen::MatrixXd n = Eigen::MatrixXd::Identity(e, e);
  out.m.push_back(m);
  out.m_inv.push_back(n);

  struct Stage {
    Eigen::VectorXd ky;
    Eigen::MatrixXd km, kn;
  };
  auto rhs = [&coeff](const Eigen::VectorXd& yv, const Eigen::MatrixXd& mv,
                      const Eigen::MatrixXd& nv) -> Stage {
    const Eigen::MatrixXd g = coeff.grad_b(yv);
    return {coeff.b(yv), g * mv, -nv * g};
  };

  for (std::size_t i = 0; i < grid.n_intervals(); ++i) {
    const Stage k1 = rhs(y, m, n);
    const Stage k2 = rhs(y + (0.5 * dt) * k1.ky, m + (0.5 * dt) * k1.km, n + (0.5 * dt) * k1.kn);
    const Stage k3 = rhs(y + (0.5 * dt) * k2.ky, m + (0.5 * dt) * k2.km, n + (0.5 * dt) * k2.kn);
    const Stage k4 = rhs(y + dt * k3.ky, m + dt * k3.km, n + dt * k3.kn);
    y += (dt / 6.0) * (k1.ky + 2.0 * k2.ky + 2.0 * k3.ky + k4.ky);
    m += (dt / 6.0) * (k1.km + 2.0 * k2.km + 2.0 * k3.km + k4.km);
    n += (dt / 6.0) * (k1.kn + 2.0 * k2.kn + 2.0 * k3.kn + k4.kn);

    const double defect =
        (m * n - Eigen::MatrixXd::Identity(e, e)).cwiseAbs().maxCoeff();
    if (!(defect <= 1e-6))
      throw NumericError("fundamental matrix inverse defect " + io::format_double(defect) +
                         " at node " + std::to_string(i + 1));
    out.m.push_back(m);
    out.m_inv.push_back(n);
  }
  return out;
}

rde::Trajectory solve_skeleton_ode(const rde::CoefficientField& coeff,
                                   const rde::Trajectory& y0, const Eigen::MatrixXd& h) {
  const int e = coeff.dim_e;
  const TimeGrid grid = y0.grid;
  if (h.rows() != static_cast<Eigen::Index>(grid.n_nodes()) || h.cols() != coeff.dim_d)
    throw ValidationError("driver h shape does not match grid/coefficients");
  if (h.row(0).norm() > 1e-12) throw ValidationError("driver h must start at 0");

  const FundamentalMatrix fund = solve_fundamental_matrix(coeff, y0);

  rde::Trajectory out{grid, Eigen::MatrixXd(grid.n_nodes(), e)};
  Eigen::VectorXd s = Eigen::VectorXd::Zero(e);
  out.values.row(0) = s;
  for (std::size_t i = 0; i < grid.n_intervals(); ++i) {
    const Eigen::VectorXd dh =
        h.row(static_cast<Eigen::Index>(i) + 1) - h.row(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd y_left = y0.values.row(static_cast<Eigen::Index>(i));
    s += fund.m_inv[i] * (coeff.sigma(y_left) * dh);
    out.values.row(static_cast<Eigen::Index>(i) + 1) = fund.m[i + 1] * s;
  }
  return out;
}

LimitLaw limit_covariance(const rde::CoefficientField& coeff, const rde::Trajectory& y0,
                          const TimeGrid& grid, fbm::HurstParam h) {
  if (!(y0.grid == grid)) throw ValidationError("y0 grid does not match requested grid");
  const int e = coeff.dim_e;
  const auto n = static_cast<Eigen::Index>(grid.n_intervals());
  const auto nodes = static_cast<Eigen::Index>(grid.n_nodes());

  const FundamentalMatrix fund = solve_fundamental_matrix(coeff, y0);
  const Eigen::MatrixXd gamma = fbm::increment_covariance(grid, h);

  std::vector<Eigen::MatrixXd> u;
  u.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    u.push_back(fund.m_inv[static_cast<std::size_t>(i)] *
                coeff.sigma(y0.values.row(i).transpose()));

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(nodes * e, nodes * e);

  // Prefix recursion over S_{a,b} = sum_{i<a, j<b} Gamma_ij U_i U_j^T, one
  // row of partial sums kept at a time.
  std::vector<Eigen::MatrixXd> prev(static_cast<std::size_t>(nodes),
                                    Eigen::MatrixXd::Zero(e, e));
  std::vector<Eigen::MatrixXd> cur(static_cast<std::size_t>(nodes));
  for (Eigen::Index a = 1; a < nodes; ++a) {
    cur[0] = Eigen::MatrixXd::Zero(e, e);
    for (Eigen::Index b = 1; b < nodes; ++b) {
      cur[static_cast<std::size_t>(b)] =
          prev[static_cast<std::size_t>(b)] + cur[static_cast<std::size_t>(b - 1)] -
          prev[static_cast<std::size_t>(b - 1)] +
          gamma(a - 1, b - 1) * (u[static_cast<std::size_t>(a - 1)] *
                                 u[static_cast<std::size_t>(b - 1)].transpose());
      cov.block(a * e, b * e, e, e) = fund.m[static_cast<std::size_t>(a)] *
                                      cur[static_cast<std::size_t>(b)] *
                                      fund.m[static_cast<std::size_t>(b)].transpose();
    }
    std::swap(prev, cur);
  }
  cov = 0.5 * (cov + cov.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  if (lo < -1e-8 * std::max(hi, 1e-300))
    throw NumericError("limit covariance failed the PSD check: min eigenvalue " +
                       io::format_double(lo));

  LimitLaw law{grid, e, std::move(cov), {}};
  law.terminal_covariance = law.covariance.block((nodes - 1) * e, (nodes - 1) * e, e, e);
  return law;
}

double terminal_rate(const LimitLaw& limit, const Eigen::VectorXd& direction, double z) {
  if (direction.size() != limit.dim_e)
    throw ValidationError("event direction dimension does not match the limit law");
  if (std::abs(direction.norm() - 1.0) > 1e-6)
    throw ValidationError("event direction must be a unit vector");
  const double v = direction.dot(limit.terminal_covariance * direction);
  if (!(v > 1e-12))
    throw NumericError("terminal variance " + io::format_double(v) +
                       " is degenerate; event direction not reachable");
  return z * z / (2.0 * v);
}

void LimitLaw::write_csv(std::ostream& os) const {
  os << "kind,row,col,value\n";
  for (int i = 0; i < dim_e; ++i)
    for (int j = 0; j < dim_e; ++j)
      os << "terminal_cov," << i << "," << j << ","
         << io::format_double(terminal_covariance(i, j)) << "\n";
  for (std::size_t a = 0; a < grid.n_nodes(); ++a)
    for (int i = 0; i < dim_e; ++i) {
      const auto k = static_cast<Eigen::Index>(a) * dim_e + i;
      os << "marginal_var," << a << "," << i << "," << io::format_double(covariance(k, k))
         << "\n";
    }
}

} // namespace roughmdp::skeleton
