#include "roughmdp/fbm.hpp"

#include <cmath>
#include <complex>
#include <ostream>

#include <Eigen/Cholesky>

#include "roughmdp/fft.hpp"
#include "roughmdp/io.hpp"
#include "roughmdp/rng.hpp"

namespace roughmdp::fbm {

namespace detail {

double fbm_covariance_raw(double s, double t, double h) {
  const double two_h = 2.0 * h;
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

// Autocovariance of the stationary unit-lag increment sequence at lag k,
// before the dt^{2H} scale.
double increment_autocorr(std::int64_t k, double h) {
  if (k == 0) return 1.0;
  const double kk = static_cast<double>(k);
  const double two_h = 2.0 * h;
  return 0.5 * (std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) +
                std::pow(kk - 1.0, two_h));
}

} // namespace detail

double fbm_covariance(double s, double t, HurstParam h) {
  if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0)
    throw ValidationError("fbm_covariance arguments must lie in [0,1]");
  return detail::fbm_covariance_raw(s, t, h.value());
}

Eigen::MatrixXd increment_covariance(const TimeGrid& grid, HurstParam h) {
  const auto n = static_cast<Eigen::Index>(grid.n_intervals());
  const double scale = std::pow(grid.mesh(), 2.0 * h.value());
  Eigen::MatrixXd gamma(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = scale * detail::increment_autocorr(i - j, h.value());
      gamma(i, j) = v;
      gamma(j, i) = v;
    }
  return gamma;
}

std::string to_string(SampleMethod m) {
  return m == SampleMethod::CirculantEmbedding ? "circulant_embedding" : "dense_cholesky";
}

FbmSampler::FbmSampler(const TimeGrid& grid, HurstParam h)
    : grid_(grid), h_(h), method_(SampleMethod::CirculantEmbedding) {
  build(false);
}

FbmSampler::FbmSampler(const TimeGrid& grid, HurstParam h, SampleMethod forced)
    : grid_(grid), h_(h), method_(forced) {
  build(true);
}

void FbmSampler::build(bool forced) {
  const std::size_t n = grid_.n_intervals();

  if (method_ == SampleMethod::CirculantEmbedding || !forced) {
    // Embed the n-term increment covariance into an M = 2n circulant and
    // diagonalize it by FFT; eigenvalues must come out (numerically) real.
    const std::size_t m_size = 2 * n;
    const double scale = std::pow(grid_.mesh(), 2.0 * h_.value());
    std::vector<std::complex<double>> c(m_size);
    for (std::size_t j = 0; j <= n; ++j)
      c[j] = scale * detail::increment_autocorr(static_cast<std::int64_t>(j), h_.value());
    for (std::size_t j = 1; j < n; ++j) c[m_size - j] = c[j];

    roughmdp::detail::fft_radix2(c, false);

    double max_eig = 0.0;
    double min_eig = 0.0;
    for (const auto& z : c) {
      max_eig = std::max(max_eig, z.real());
      min_eig = std::min(min_eig, z.real());
    }
    const bool embeddable = min_eig >= -1e-10 * max_eig;
    if (embeddable) {
      method_ = SampleMethod::CirculantEmbedding;
      spectrum_scale_.resize(m_size);
      const double inv_m = 1.0 / static_cast<double>(m_size);
      for (std::size_t k = 0; k < m_size; ++k)
        spectrum_scale_[k] = std::sqrt(std::max(c[k].real(), 0.0) * inv_m);
      return;
    }
    if (forced)
      throw NumericError("circulant embedding spectrum has negative entries (min " +
                         io::format_double(min_eig) + "); cannot force this method");
    method_ = SampleMethod::DenseCholesky;
  }

  // Dense fallback: factor the increment Gram matrix directly.
  Eigen::LLT<Eigen::MatrixXd> llt(increment_covariance(grid_, h_));
  if (llt.info() != Eigen::Success)
    throw NumericError("increment covariance is not positive definite; Cholesky failed");
  chol_ = llt.matrixL();
}

Eigen::MatrixXd FbmSampler::sample_path(int dim, std::uint64_t seed,
                                        std::uint64_t path_index) const {
  if (dim < 1) throw ValidationError("dim must be >= 1");
  const auto n = static_cast<Eigen::Index>(grid_.n_intervals());
  Eigen::MatrixXd path(n + 1, dim);
  path.row(0).setZero();

  for (int coord = 0; coord < dim; ++coord) {
    RandomSubstream rng(seed, path_index, static_cast<std::uint64_t>(coord));
    Eigen::VectorXd inc(n);

    if (method_ == SampleMethod::CirculantEmbedding) {
      const std::size_t m_size = spectrum_scale_.size();
      std::vector<std::complex<double>> y(m_size);
      y[0] = spectrum_scale_[0] * rng.next_gaussian();
      y[m_size / 2] = spectrum_scale_[m_size / 2] * rng.next_gaussian();
      for (std::size_t j = 1; j < m_size / 2; ++j) {
        const double s = spectrum_scale_[j] * M_SQRT1_2;
        const double a = rng.next_gaussian();
        const double b = rng.next_gaussian();
        y[j] = std::complex<double>(s * a, s * b);
        y[m_size - j] = std::conj(y[j]);
      }
      roughmdp::detail::fft_radix2(y, false);
      for (Eigen::Index i = 0; i < n; ++i) inc[i] = y[static_cast<std::size_t>(i)].real();
    } else {
      Eigen::VectorXd z(n);
      for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.next_gaussian();
      inc = chol_ * z;
    }

    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += inc[i];
      path(i + 1, coord) = acc;
    }
  }
  return path;
}

FbmBatch sample_fbm(const TimeGrid& grid, HurstParam h, int dim, int n_paths,
                    std::uint64_t seed) {
  if (n_paths < 1) throw ValidationError("n_paths must be >= 1");
  FbmSampler sampler(grid, h);
  FbmBatch batch{grid, dim, seed, sampler.method(), {}};
  batch.paths.reserve(static_cast<std::size_t>(n_paths));
  for (int p = 0; p < n_paths; ++p)
    batch.paths.push_back(sampler.sample_path(dim, seed, static_cast<std::uint64_t>(p)));
  return batch;
}

void FbmBatch::write_csv(std::ostream& os) const {
  os << "t";
  for (int p = 0; p < n_paths(); ++p)
    for (int c = 0; c < dim; ++c) os << ",p" << p << "_c" << c;
  os << "\n";
  for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
    os << io::format_double(grid.node(i));
    for (const auto& path : paths)
      for (int c = 0; c < dim; ++c)
        os << "," << io::format_double(path(static_cast<Eigen::Index>(i), c));
    os << "\n";
  }
}

} // namespace roughmdp::fbm
