#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughmdp/grid.hpp"

namespace roughmdp::fbm {

/// Hurst parameter restricted to (1/4, 1/2]: rougher than Brownian motion
/// but still admitting a level-3 lift.
class HurstParam {
public:
  explicit HurstParam(double h) : h_(h) {
    if (!(h > 0.25) || !(h <= 0.5))
      throw ValidationError("hurst must lie in (0.25, 0.5], got " + std::to_string(h));
  }
  double value() const { return h_; }

private:
  double h_;
};

namespace detail {
// Covariance core without the HurstParam gate; used internally and by tests
// that probe the formula at boundary exponents.
double fbm_covariance_raw(double s, double t, double h);
} // namespace detail

/// R(s,t) = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2 on [0,1]^2.
double fbm_covariance(double s, double t, HurstParam h);

/// Gram matrix of the one-dimensional increments over the grid intervals:
/// entry (i,j) = R(t_{i+1},t_{j+1}) - R(t_{i+1},t_j) - R(t_i,t_{j+1}) + R(t_i,t_j).
Eigen::MatrixXd increment_covariance(const TimeGrid& grid, HurstParam h);

enum class SampleMethod { CirculantEmbedding, DenseCholesky };

std::string to_string(SampleMethod m);

/// Exact-in-distribution sampler of fractional Brownian paths on a dyadic
/// grid. The circulant embedding of the stationary increment sequence is
/// used whenever its spectrum is nonnegative (it is, for H <= 1/2, up to
/// rounding); a dense Cholesky of the increment Gram matrix is the fallback.
///
/// Randomness is consumed from one counter-based substream per
/// (seed, path_index, coordinate), so batches are identical no matter how
/// the paths are distributed over threads.
class FbmSampler {
public:
  FbmSampler(const TimeGrid& grid, HurstParam h);
  FbmSampler(const TimeGrid& grid, HurstParam h, SampleMethod forced);

  SampleMethod method() const { return method_; }
  const TimeGrid& grid() const { return grid_; }

  /// One path started at 0; rows = nodes, cols = coordinates.
  Eigen::MatrixXd sample_path(int dim, std::uint64_t seed, std::uint64_t path_index) const;

private:
  void build(bool forced);

  TimeGrid grid_;
  HurstParam h_;
  SampleMethod method_;
  std::vector<double> spectrum_scale_; // circulant: sqrt(lambda_k / M) factors
  Eigen::MatrixXd chol_;               // fallback: lower-triangular factor
};

struct FbmBatch {
  TimeGrid grid;
  int dim = 1;
  std::uint64_t seed = 0;
  SampleMethod method = SampleMethod::CirculantEmbedding;
  std::vector<Eigen::MatrixXd> paths; // each n_nodes x dim

  int n_paths() const { return static_cast<int>(paths.size()); }

  /// One row per node; columns are path-major (p0_c0, p0_c1, ..., p1_c0, ...).
  void write_csv(std::ostream& os) const;
};

FbmBatch sample_fbm(const TimeGrid& grid, HurstParam h, int dim, int n_paths,
                    std::uint64_t seed);

} // namespace roughmdp::fbm
