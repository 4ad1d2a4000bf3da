#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "roughmdp/fbm.hpp"
#include "roughmdp/grid.hpp"

namespace roughmdp::roughpath {

/// Iterated-integral increments of one (sub)interval, levels 1..depth.
/// Index conventions: x2(i,j) integrates coordinate i before j;
/// x3 is flat with index (i*d + j)*d + k, i earliest.
struct IncrementTensors {
  int dim = 0;
  int depth = 2;
  Eigen::VectorXd x1; // d
  Eigen::MatrixXd x2; // d x d
  Eigen::VectorXd x3; // d^3 when depth == 3, else empty

  static IncrementTensors zero(int dim, int depth);
};

/// Concatenation of adjacent increments ([s,u] then [u,t]):
///   x1 = a1 + b1
///   x2 = a2 + b2 + a1 (x) b1
///   x3 = a3 + b3 + a1 (x) b2 + a2 (x) b1
IncrementTensors chen_combine(const IncrementTensors& a, const IncrementTensors& b);

IncrementTensors dilate(const IncrementTensors& a, double c);

/// Level-N lift of a grid path, stored per interval. Increments over merged
/// intervals are reconstructed with chen_combine on demand, which keeps the
/// storage linear in the number of intervals.
class RoughPathLift {
public:
  RoughPathLift(const TimeGrid& grid, int dim, int depth,
                std::vector<IncrementTensors> intervals);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  int depth() const { return depth_; }
  std::size_t n_intervals() const { return intervals_.size(); }
  const IncrementTensors& interval(std::size_t i) const { return intervals_[i]; }

  /// Increment over [t_i, t_j], i <= j, by folding chen_combine.
  IncrementTensors over(std::size_t i, std::size_t j) const;

  /// Flat dump: interval index, level, multi-index, value.
  void write_csv(std::ostream& os) const;

private:
  TimeGrid grid_;
  int dim_;
  int depth_;
  std::vector<IncrementTensors> intervals_;
};

/// Exact lift of the piecewise-linear interpolant of `path` (rows = nodes):
/// per interval with increment v, x1 = v, x2 = v(x)v/2, x3 = v(x)v(x)v/6.
RoughPathLift lift_piecewise_linear(const TimeGrid& grid, const Eigen::MatrixXd& path,
                                    int depth);

/// Lift depth matching the Hurst regime: 2 on (1/3, 1/2], 3 on (1/4, 1/3].
int depth_for_hurst(fbm::HurstParam h);

/// Default working roughness exponent for diagnostics: just below H.
inline double default_alpha(fbm::HurstParam h) { return h.value() - 0.01; }

RoughPathLift dilate(const RoughPathLift& x, double c);

/// Discrete surrogate of the homogeneous alpha-Hoelder norm: per level k the
/// max over grid pairs s < t of |x^k_{s,t}| / (t-s)^{k*alpha}, Frobenius norms.
std::vector<double> holder_estimate(const RoughPathLift& x, double alpha);

} // namespace roughmdp::roughpath
