#include "roughmdp/coefficients.hpp"

#include <cmath>

namespace roughmdp::rde {

namespace {

std::vector<Eigen::MatrixXd> zero_tensor(std::size_t count, Eigen::Index rows,
                                         Eigen::Index cols) {
  return std::vector<Eigen::MatrixXd>(count, Eigen::MatrixXd::Zero(rows, cols));
}

void check_dims(const Eigen::MatrixXd& a_matrix, const Eigen::VectorXd& c,
                const Eigen::MatrixXd& sigma0) {
  const auto e = sigma0.rows();
  if (a_matrix.rows() != e || a_matrix.cols() != e || c.size() != e)
    throw ValidationError("coefficient shapes disagree: A must be e x e, c length e");
}

} // namespace

CoefficientField make_linear_field(const Eigen::MatrixXd& a_matrix, const Eigen::VectorXd& c,
                                   const Eigen::MatrixXd& sigma0) {
  check_dims(a_matrix, c, sigma0);
  const int e = static_cast<int>(sigma0.rows());
  const int d = static_cast<int>(sigma0.cols());
  CoefficientField f;
  f.dim_d = d;
  f.dim_e = e;
  f.b = [a_matrix, c](const Eigen::VectorXd& y) -> Eigen::VectorXd { return a_matrix * y + c; };
  f.grad_b = [a_matrix](const Eigen::VectorXd&) { return a_matrix; };
  f.hess_b = [e](const Eigen::VectorXd&) { return zero_tensor(e, e, e); };
  f.sigma = [sigma0](const Eigen::VectorXd&) { return sigma0; };
  f.grad_sigma = [e, d](const Eigen::VectorXd&) { return zero_tensor(e, e, d); };
  f.hess_sigma = [e, d](const Eigen::VectorXd&) {
    return zero_tensor(static_cast<std::size_t>(e) * e, e, d);
  };
  f.third_sigma = [e, d](const Eigen::VectorXd&) {
    return zero_tensor(static_cast<std::size_t>(e) * e * e, e, d);
  };
  return f;
}

CoefficientField make_bilinear_field(const Eigen::MatrixXd& a_matrix, const Eigen::VectorXd& c,
                                     const Eigen::MatrixXd& sigma0,
                                     const std::vector<Eigen::MatrixXd>& g) {
  check_dims(a_matrix, c, sigma0);
  const int e = static_cast<int>(sigma0.rows());
  const int d = static_cast<int>(sigma0.cols());
  if (g.size() != static_cast<std::size_t>(e))
    throw ValidationError("bilinear field needs one G slice per state coordinate");
  for (const auto& gk : g)
    if (gk.rows() != e || gk.cols() != d)
      throw ValidationError("each G slice must be e x d");

  CoefficientField f = make_linear_field(a_matrix, c, sigma0);
  f.sigma = [sigma0, g, e](const Eigen::VectorXd& y) -> Eigen::MatrixXd {
    Eigen::MatrixXd s = sigma0;
    for (int k = 0; k < e; ++k) s += y[k] * g[k];
    return s;
  };
  f.grad_sigma = [g](const Eigen::VectorXd&) { return g; };
  return f;
}

CoefficientField make_tanh_field(const Eigen::MatrixXd& a_matrix, const Eigen::MatrixXd& sigma0,
                                 const Eigen::MatrixXd& d_matrix) {
  const int e = static_cast<int>(sigma0.rows());
  const int d = static_cast<int>(sigma0.cols());
  if (a_matrix.rows() != e || a_matrix.cols() != e || d_matrix.rows() != e ||
      d_matrix.cols() != d)
    throw ValidationError("tanh field shapes disagree");

  // tanh derivative chain: t' = s, s := 1 - t^2; t'' = -2 t s;
  // t''' = -2 s^2 + 4 t^2 s.
  CoefficientField f;
  f.dim_d = d;
  f.dim_e = e;
  f.b = [a_matrix](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return a_matrix * y.array().tanh().matrix();
  };
  f.grad_b = [a_matrix, e](const Eigen::VectorXd& y) -> Eigen::MatrixXd {
    Eigen::MatrixXd gb(e, e);
    for (int k = 0; k < e; ++k) {
      const double t = std::tanh(y[k]);
      gb.col(k) = a_matrix.col(k) * (1.0 - t * t);
    }
    return gb;
  };
  f.hess_b = [a_matrix, e](const Eigen::VectorXd& y) {
    auto h = zero_tensor(e, e, e);
    for (int k = 0; k < e; ++k) {
      const double t = std::tanh(y[k]);
      const double s = 1.0 - t * t;
      for (int i = 0; i < e; ++i) h[static_cast<std::size_t>(i)](k, k) = a_matrix(i, k) * (-2.0 * t * s);
    }
    return h;
  };
  f.sigma = [sigma0, d_matrix, e, d](const Eigen::VectorXd& y) -> Eigen::MatrixXd {
    Eigen::MatrixXd s = sigma0;
    for (int i = 0; i < e; ++i) s.row(i) += d_matrix.row(i) * std::tanh(y[i]);
    return s;
  };
  f.grad_sigma = [d_matrix, e, d](const Eigen::VectorXd& y) {
    auto g = zero_tensor(e, e, d);
    for (int k = 0; k < e; ++k) {
      const double t = std::tanh(y[k]);
      g[static_cast<std::size_t>(k)].row(k) = d_matrix.row(k) * (1.0 - t * t);
    }
    return g;
  };
  f.hess_sigma = [d_matrix, e, d](const Eigen::VectorXd& y) {
    auto h = zero_tensor(static_cast<std::size_t>(e) * e, e, d);
    for (int k = 0; k < e; ++k) {
      const double t = std::tanh(y[k]);
      const double s = 1.0 - t * t;
      h[static_cast<std::size_t>(k) * e + k].row(k) = d_matrix.row(k) * (-2.0 * t * s);
    }
    return h;
  };
  f.third_sigma = [d_matrix, e, d](const Eigen::VectorXd& y) {
    auto h = zero_tensor(static_cast<std::size_t>(e) * e * e, e, d);
    for (int k = 0; k < e; ++k) {
      const double t = std::tanh(y[k]);
      const double s = 1.0 - t * t;
      h[(static_cast<std::size_t>(k) * e + k) * e + k].row(k) =
          d_matrix.row(k) * (-2.0 * s * s + 4.0 * t * t * s);
    }
    return h;
  };
  return f;
}

CoefficientField
with_finite_differences(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> b,
                        std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> sigma, int dim_d,
                        int dim_e) {
  const int e = dim_e;
  const int d = dim_d;
  constexpr double h1 = 1e-5;
  constexpr double h2 = 1e-4;
  constexpr double h3 = 1e-3;

  CoefficientField f;
  f.dim_d = d;
  f.dim_e = e;
  f.finite_difference_derivatives = true;
  f.b = b;
  f.sigma = sigma;

  f.grad_b = [b, e](const Eigen::VectorXd& y) -> Eigen::MatrixXd {
    Eigen::MatrixXd g(e, e);
    Eigen::VectorXd yp = y, ym = y;
    for (int k = 0; k < e; ++k) {
      yp[k] = y[k] + h1;
      ym[k] = y[k] - h1;
      g.col(k) = (b(yp) - b(ym)) / (2.0 * h1);
      yp[k] = y[k];
      ym[k] = y[k];
    }
    return g;
  };
  f.hess_b = [b, e](const Eigen::VectorXd& y) {
    auto h = zero_tensor(e, e, e);
    Eigen::VectorXd q = y;
    for (int k = 0; k < e; ++k)
      for (int l = 0; l <= k; ++l) {
        q = y;
        q[k] += h2;
        q[l] += h2;
        Eigen::VectorXd v = b(q);
        q = y;
        q[k] += h2;
        q[l] -= h2;
        v -= b(q);
        q = y;
        q[k] -= h2;
        q[l] += h2;
        v -= b(q);
        q = y;
        q[k] -= h2;
        q[l] -= h2;
        v += b(q);
        v /= 4.0 * h2 * h2;
        for (int i = 0; i < e; ++i) {
          h[static_cast<std::size_t>(i)](k, l) = v[i];
          h[static_cast<std::size_t>(i)](l, k) = v[i];
        }
      }
    return h;
  };

  auto fd_grad = [](const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& fn,
                    const Eigen::VectorXd& y, int k, double step) -> Eigen::MatrixXd {
    Eigen::VectorXd yp = y, ym = y;
    yp[k] += step;
    ym[k] -= step;
    return (fn(yp) - fn(ym)) / (2.0 * step);
  };

  f.grad_sigma = [sigma, e, fd_grad](const Eigen::VectorXd& y) {
    std::vector<Eigen::MatrixXd> g;
    g.reserve(static_cast<std::size_t>(e));
    for (int k = 0; k < e; ++k) g.push_back(fd_grad(sigma, y, k, h1));
    return g;
  };
  f.hess_sigma = [grad_sigma = f.grad_sigma, e, fd_grad](const Eigen::VectorXd& y) {
    auto slice = [grad_sigma](int k) {
      return [grad_sigma, k](const Eigen::VectorXd& p) { return grad_sigma(p)[static_cast<std::size_t>(k)]; };
    };
    std::vector<Eigen::MatrixXd> h;
    h.reserve(static_cast<std::size_t>(e) * e);
    for (int k = 0; k < e; ++k)
      for (int l = 0; l < e; ++l) h.push_back(fd_grad(slice(k), y, l, h2));
    return h;
  };
  f.third_sigma = [hess_sigma = f.hess_sigma, e, fd_grad](const Eigen::VectorXd& y) {
    auto slice = [hess_sigma, e](int k, int l) {
      return [hess_sigma, e, k, l](const Eigen::VectorXd& p) {
        return hess_sigma(p)[static_cast<std::size_t>(k) * e + l];
      };
    };
    std::vector<Eigen::MatrixXd> h;
    h.reserve(static_cast<std::size_t>(e) * e * e);
    for (int k = 0; k < e; ++k)
      for (int l = 0; l < e; ++l)
        for (int m = 0; m < e; ++m) h.push_back(fd_grad(slice(k, l), y, m, h3));
    return h;
  };
  return f;
}

double derivative_consistency(const CoefficientField& f,
                              const std::vector<Eigen::VectorXd>& probes) {
  const int e = f.dim_e;
  // Probe steps widen with the order so the check stays meaningful even for
  // fields whose derivatives are themselves finite differences.
  constexpr double h = 1e-5;
  constexpr double h_hess = 1e-4;
  constexpr double h_third = 1e-3;
  double worst = 0.0;
  auto rel = [](double err, double scale) { return err / std::max(scale, 1.0); };

  for (const auto& y : probes) {
    // grad_b vs FD of b
    const Eigen::MatrixXd gb = f.grad_b(y);
    for (int k = 0; k < e; ++k) {
      Eigen::VectorXd yp = y, ym = y;
      yp[k] += h;
      ym[k] -= h;
      const Eigen::VectorXd fd = (f.b(yp) - f.b(ym)) / (2.0 * h);
      worst = std::max(worst, rel((gb.col(k) - fd).norm(), fd.norm()));
    }
    // hess_b vs FD of grad_b
    const auto hb = f.hess_b(y);
    for (int l = 0; l < e; ++l) {
      Eigen::VectorXd yp = y, ym = y;
      yp[l] += h_hess;
      ym[l] -= h_hess;
      const Eigen::MatrixXd fd = (f.grad_b(yp) - f.grad_b(ym)) / (2.0 * h_hess);
      for (int i = 0; i < e; ++i)
        for (int k = 0; k < e; ++k)
          worst = std::max(worst, rel(std::abs(hb[static_cast<std::size_t>(i)](k, l) - fd(i, k)),
                                      std::abs(fd(i, k))));
    }
    // grad_sigma vs FD of sigma
    const auto gs = f.grad_sigma(y);
    for (int k = 0; k < e; ++k) {
      Eigen::VectorXd yp = y, ym = y;
      yp[k] += h;
      ym[k] -= h;
      const Eigen::MatrixXd fd = (f.sigma(yp) - f.sigma(ym)) / (2.0 * h);
      worst = std::max(worst, rel((gs[static_cast<std::size_t>(k)] - fd).norm(), fd.norm()));
    }
    // hess_sigma vs FD of grad_sigma
    const auto hs = f.hess_sigma(y);
    for (int l = 0; l < e; ++l) {
      Eigen::VectorXd yp = y, ym = y;
      yp[l] += h_hess;
      ym[l] -= h_hess;
      const auto gp = f.grad_sigma(yp);
      const auto gm = f.grad_sigma(ym);
      for (int k = 0; k < e; ++k) {
        const Eigen::MatrixXd fd =
            (gp[static_cast<std::size_t>(k)] - gm[static_cast<std::size_t>(k)]) / (2.0 * h_hess);
        worst = std::max(worst,
                         rel((hs[static_cast<std::size_t>(k) * e + l] - fd).norm(), fd.norm()));
      }
    }
    // third_sigma vs FD of hess_sigma
    const auto ts = f.third_sigma(y);
    for (int m = 0; m < e; ++m) {
      Eigen::VectorXd yp = y, ym = y;
      yp[m] += h_third;
      ym[m] -= h_third;
      const auto hp = f.hess_sigma(yp);
      const auto hm = f.hess_sigma(ym);
      for (int k = 0; k < e; ++k)
        for (int l = 0; l < e; ++l) {
          const std::size_t kl = static_cast<std::size_t>(k) * e + l;
          const Eigen::MatrixXd fd = (hp[kl] - hm[kl]) / (2.0 * h_third);
          worst = std::max(worst, rel((ts[(kl)*e + m] - fd).norm(), fd.norm()));
        }
    }
  }
  return worst;
}

} // namespace roughmdp::rde
