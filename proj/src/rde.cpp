#include "roughmdp/rde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "roughmdp/io.hpp"

namespace roughmdp::rde {

namespace {

// 8-point Gauss-Legendre rule mapped to [0,1].
constexpr int kGlPoints = 8;
constexpr double kGlNode[kGlPoints] = {
    0.5 - 0.48014492824876815, 0.5 - 0.39833323870681335, 0.5 - 0.2627662049581645,
    0.5 - 0.0917173212478249,  0.5 + 0.0917173212478249,  0.5 + 0.2627662049581645,
    0.5 + 0.39833323870681335, 0.5 + 0.48014492824876815};
constexpr double kGlWeight[kGlPoints] = {
    0.050614268145188156, 0.11119051722668723, 0.15685332293894365, 0.1813418916891810,
    0.1813418916891810,   0.15685332293894365, 0.11119051722668723, 0.050614268145188156};

template <typename Rhs>
Eigen::VectorXd rk4_increment(const Rhs& f, const Eigen::VectorXd& y, double dt) {
  const Eigen::VectorXd k1 = f(y);
  const Eigen::VectorXd k2 = f(y + (0.5 * dt) * k1);
  const Eigen::VectorXd k3 = f(y + (0.5 * dt) * k2);
  const Eigen::VectorXd k4 = f(y + dt * k3);
  return (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Eigen::Index idx3(int d, int i, int j, int k) {
  return static_cast<Eigen::Index>((i * d + j) * d + k);
}

// Noise part of one Davie step for dz = sigma(.) dx evaluated at `p`:
//   sigma(p) (s x1) + D-terms (s^2 deriv_scale x2) [+ level-3 (s^3 deriv_scale^2 x3)].
Eigen::VectorXd noise_increment(const CoefficientField& f, const Eigen::VectorXd& p,
                                const roughpath::IncrementTensors& x, double s,
                                double deriv_scale) {
  const int d = f.dim_d;
  const int e = f.dim_e;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(e);
  if (s == 0.0) return out;

  const Eigen::MatrixXd sig = f.sigma(p);
  out.noalias() = sig * (s * x.x1);

  const double s2 = s * s * deriv_scale;
  if (s2 != 0.0) {
    const auto gs = f.grad_sigma(p);
    // w_{kj} = (grad of column j along column k): w_{kj,i} = sum_l gs[l](i,j) sig(l,k)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) {
        const double weight = s2 * x.x2(k, j);
        if (weight == 0.0) continue;
        for (int l = 0; l < e; ++l) out += (weight * sig(l, k)) * gs[static_cast<std::size_t>(l)].col(j);
      }

    const double s3 = s2 * s * deriv_scale;
    if (x.depth == 3 && s3 != 0.0) {
      const auto hs = f.hess_sigma(p);
      // Twice-iterated derivative of column c along columns a then b:
      //   sum_{p,l} [hs(p,l)(i,c) sig(l,b) + gs[l](i,c) gs[p](l,b)] sig(p,a)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          for (int c = 0; c < d; ++c) {
            const double weight = s3 * x.x3[idx3(d, a, b, c)];
            if (weight == 0.0) continue;
            for (int pi = 0; pi < e; ++pi) {
              const double sp = sig(pi, a);
              if (sp == 0.0) continue;
              for (int l = 0; l < e; ++l)
                out +=
                    (weight * sp) *
                    (sig(l, b) * hs[static_cast<std::size_t>(pi) * e + l].col(c) +
                     gs[static_cast<std::size_t>(pi)](l, b) * gs[static_cast<std::size_t>(l)].col(c));
            }
          }
    }
  }
  return out;
}

void check_state(const Eigen::VectorXd& y, std::size_t node, const char* what) {
  if (!y.allFinite())
    throw NumericError(std::string(what) + ": non-finite state at node " + std::to_string(node) +
                       "; check the coefficient field");
}

void check_driver(const CoefficientField& coeff, const roughpath::RoughPathLift& x,
                  const TimeGrid& grid) {
  if (!(x.grid() == grid)) throw ValidationError("driver lift grid does not match solver grid");
  if (x.dim() != coeff.dim_d)
    throw ValidationError("driver dimension does not match coefficient field");
}

} // namespace

void Trajectory::write_csv(std::ostream& os) const {
  os << "t";
  for (int c = 0; c < dim(); ++c) os << ",y" << c;
  os << "\n";
  for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
    os << io::format_double(grid.node(i));
    for (int c = 0; c < dim(); ++c)
      os << "," << io::format_double(values(static_cast<Eigen::Index>(i), c));
    os << "\n";
  }
}

KappaSpec KappaSpec::power(double theta) {
  if (!(theta > 0.0) || !(theta < 1.0))
    throw ValidationError("kappa power exponent theta must lie in (0,1)");
  return KappaSpec(true, theta, {}, {});
}

KappaSpec KappaSpec::table(std::vector<double> eps, std::vector<double> kappa) {
  if (eps.empty() || eps.size() != kappa.size())
    throw ValidationError("kappa table needs equal-length nonempty eps/kappa lists");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(eps[i] <= 1.0))
      throw ValidationError("kappa table eps values must lie in (0,1]");
    if (!(kappa[i] > 0.0) || !std::isfinite(kappa[i]))
      throw ValidationError("kappa table values must be positive and finite");
    if (i > 0 && !(eps[i] < eps[i - 1]))
      throw ValidationError("kappa table eps values must be strictly decreasing");
  }
  return KappaSpec(false, 0.0, std::move(eps), std::move(kappa));
}

double KappaSpec::operator()(double eps) const {
  if (!(eps > 0.0)) throw ValidationError("kappa is evaluated for eps > 0 only");
  if (is_power_) return std::pow(eps, -theta_);
  // Exact grid hits return the stored value; in-between values interpolate.
  for (std::size_t i = 0; i < eps_.size(); ++i)
    if (eps_[i] == eps) return kappa_[i];
  if (eps > eps_.front() || eps < eps_.back())
    throw ValidationError("eps outside the kappa table range");
  std::size_t hi = 1;
  while (eps_[hi] > eps) ++hi;
  const double w = (eps - eps_[hi]) / (eps_[hi - 1] - eps_[hi]);
  return kappa_[hi] + w * (kappa_[hi - 1] - kappa_[hi]);
}

double KappaSpec::eps_kappa(double eps) const {
  if (eps == 0.0) return 0.0;
  return eps * (*this)(eps);
}

void KappaSpec::validate_on(const std::vector<double>& eps_grid) const {
  double prev_eps = 0.0;
  double prev_kappa = 0.0;
  double prev_u = 0.0;
  bool first = true;
  // Walk the grid from the smallest eps upward.
  for (auto it = eps_grid.rbegin(); it != eps_grid.rend(); ++it) {
    const double eps = *it;
    const double k = (*this)(eps);
    if (!(k > 0.0) || !std::isfinite(k))
      throw ValidationError("kappa must be positive and finite on the eps grid");
    const double u = eps * k;
    if (!first) {
      if (eps <= prev_eps) throw ValidationError("eps grid must be strictly decreasing");
      if (k > prev_kappa + 1e-12)
        throw ValidationError("kappa must be non-increasing in eps on the grid");
      if (u < prev_u - 1e-12)
        throw ValidationError("eps*kappa(eps) must shrink toward 0 with eps on the grid");
    }
    prev_eps = eps;
    prev_kappa = k;
    prev_u = u;
    first = false;
  }
}

Trajectory solve_base_ode(const CoefficientField& coeff, const Eigen::VectorXd& a,
                          const TimeGrid& grid) {
  if (a.size() != coeff.dim_e)
    throw ValidationError("initial point dimension does not match coefficient field");
  const double dt = grid.mesh();
  Trajectory out{grid, Eigen::MatrixXd(grid.n_nodes(), coeff.dim_e)};
  Eigen::VectorXd y = a;
  out.values.row(0) = y;
  for (std::size_t i = 0; i < grid.n_intervals(); ++i) {
    y += rk4_increment(coeff.b, y, dt);
    check_state(y, i + 1, "solve_base_ode");
    out.values.row(static_cast<Eigen::Index>(i) + 1) = y;
  }
  return out;
}

Trajectory solve_rde(const CoefficientField& coeff, const Eigen::VectorXd& a,
                     const roughpath::RoughPathLift& x, double eps, const TimeGrid& grid) {
  if (!(eps >= 0.0) || !(eps <= 1.0)) throw ValidationError("eps must lie in [0,1]");
  if (a.size() != coeff.dim_e)
    throw ValidationError("initial point dimension does not match coefficient field");
  check_driver(coeff, x, grid);

  const double dt = grid.mesh();
  Trajectory out{grid, Eigen::MatrixXd(grid.n_nodes(), coeff.dim_e)};
  Eigen::VectorXd y = a;
  out.values.row(0) = y;
  for (std::size_t i = 0; i < grid.n_intervals(); ++i) {
    Eigen::VectorXd step = rk4_increment(coeff.b, y, dt);
    if (eps > 0.0) step += noise_increment(coeff, y, x.interval(i), eps, 1.0);
    y += step;
    check_state(y, i + 1, "solve_rde");
    out.values.row(static_cast<Eigen::Index>(i) + 1) = y;
  }
  return out;
}

Eigen::VectorXd theta_drift(const CoefficientField& coeff, const Eigen::VectorXd& y0,
                            const Eigen::VectorXd& z, double u) {
  if (!(u >= 0.0)) throw ValidationError("theta_drift requires u >= 0");
  if (u == 0.0) return coeff.grad_b(y0) * z; // integrand constant in theta
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(coeff.dim_e);
  for (int q = 0; q < kGlPoints; ++q)
    acc += kGlWeight[q] * (coeff.grad_b(y0 + (kGlNode[q] * u) * z) * z);
  return acc;
}

std::pair<Trajectory, Trajectory> solve_coupled_system(const CoefficientField& coeff,
                                                       const Eigen::VectorXd& a,
                                                       const roughpath::RoughPathLift& x,
                                                       double eps, const KappaSpec& kappa,
                                                       const TimeGrid& grid) {
  if (!(eps >= 0.0) || !(eps <= 1.0)) throw ValidationError("eps must lie in [0,1]");
  if (a.size() != coeff.dim_e)
    throw ValidationError("initial point dimension does not match coefficient field");
  check_driver(coeff, x, grid);

  const int e = coeff.dim_e;
  const double u = kappa.eps_kappa(eps);
  const double dt = grid.mesh();

  auto coupled_rhs = [&](const Eigen::VectorXd& state) -> Eigen::VectorXd {
    Eigen::VectorXd rhs(2 * e);
    rhs.head(e) = coeff.b(state.head(e));
    rhs.tail(e) = theta_drift(coeff, state.head(e), state.tail(e), u);
    return rhs;
  };

  Trajectory y_out{grid, Eigen::MatrixXd(grid.n_nodes(), e)};
  Trajectory z_out{grid, Eigen::MatrixXd(grid.n_nodes(), e)};
  Eigen::VectorXd state = Eigen::VectorXd::Zero(2 * e);
  state.head(e) = a;
  y_out.values.row(0) = state.head(e);
  z_out.values.row(0) = state.tail(e);

  for (std::size_t i = 0; i < grid.n_intervals(); ++i) {
    Eigen::VectorXd step = rk4_increment(coupled_rhs, state, dt);
    const Eigen::VectorXd w = state.head(e) + u * state.tail(e);
    step.tail(e) += noise_increment(coeff, w, x.interval(i), 1.0, u);
    state += step;
    check_state(state, i + 1, "solve_coupled_system");
    y_out.values.row(static_cast<Eigen::Index>(i) + 1) = state.head(e);
    z_out.values.row(static_cast<Eigen::Index>(i) + 1) = state.tail(e);
  }
  return {std::move(y_out), std::move(z_out)};
}

Trajectory phi_map(const CoefficientField& coeff, const Eigen::VectorXd& a, double eps,
                   const roughpath::RoughPathLift& x, const KappaSpec& kappa,
                   const TimeGrid& grid) {
  return solve_coupled_system(coeff, a, x, eps, kappa, grid).second;
}

Trajectory z_from_solutions(const Trajectory& y_eps, const Trajectory& y_0, double eps,
                            const KappaSpec& kappa) {
  if (!(eps > 0.0) || !(eps <= 1.0))
    throw ValidationError("z_from_solutions requires eps in (0,1]");
  if (!(y_eps.grid == y_0.grid) || y_eps.dim() != y_0.dim())
    throw ValidationError("z_from_solutions: trajectory shapes disagree");
  const double u = kappa.eps_kappa(eps);
  Trajectory z{y_eps.grid, (y_eps.values - y_0.values) / u};
  return z;
}

CoefficientField ito_drift_correction(const CoefficientField& coeff, double eps) {
  const double scale = 0.5 * eps * eps;
  if (scale == 0.0) return coeff;
  const int e = coeff.dim_e;
  const int d = coeff.dim_d;

  CoefficientField f = coeff;

  f.b = [coeff, scale, e, d](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    const Eigen::MatrixXd sig = coeff.sigma(y);
    const auto gs = coeff.grad_sigma(y);
    Eigen::VectorXd corr = Eigen::VectorXd::Zero(e);
    for (int k = 0; k < e; ++k)
      for (int j = 0; j < d; ++j) corr += sig(k, j) * gs[static_cast<std::size_t>(k)].col(j);
    return coeff.b(y) - scale * corr;
  };

  f.grad_b = [coeff, scale, e, d](const Eigen::VectorXd& y) -> Eigen::MatrixXd {
    const Eigen::MatrixXd sig = coeff.sigma(y);
    const auto gs = coeff.grad_sigma(y);
    const auto hs = coeff.hess_sigma(y);
    Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(e, e);
    for (int m = 0; m < e; ++m)
      for (int k = 0; k < e; ++k)
        for (int j = 0; j < d; ++j)
          corr.col(m) += gs[static_cast<std::size_t>(m)](k, j) * gs[static_cast<std::size_t>(k)].col(j) +
                         sig(k, j) * hs[static_cast<std::size_t>(k) * e + m].col(j);
    return coeff.grad_b(y) - scale * corr;
  };

  f.hess_b = [coeff, scale, e, d](const Eigen::VectorXd& y) {
    const Eigen::MatrixXd sig = coeff.sigma(y);
    const auto gs = coeff.grad_sigma(y);
    const auto hs = coeff.hess_sigma(y);
    const auto ts = coeff.third_sigma(y);
    auto out = coeff.hess_b(y);
    for (int m = 0; m < e; ++m)
      for (int p = 0; p < e; ++p)
        for (int k = 0; k < e; ++k)
          for (int j = 0; j < d; ++j) {
            const std::size_t km = static_cast<std::size_t>(k) * e + m;
            const std::size_t kp = static_cast<std::size_t>(k) * e + p;
            const std::size_t mp = static_cast<std::size_t>(m) * e + p;
            const Eigen::VectorXd term =
                gs[static_cast<std::size_t>(k)].col(j) * hs[mp](k, j) +
                gs[static_cast<std::size_t>(m)](k, j) * hs[kp].col(j) +
                gs[static_cast<std::size_t>(p)](k, j) * hs[km].col(j) +
                sig(k, j) * ts[km * e + p].col(j);
            for (int i = 0; i < e; ++i) out[static_cast<std::size_t>(i)](m, p) -= scale * term[i];
          }
    return out;
  };

  return f;
}

} // namespace roughmdp::rde
