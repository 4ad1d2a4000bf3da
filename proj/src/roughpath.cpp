#include "roughmdp/roughpath.hpp"

#include <cmath>
#include <ostream>

#include "roughmdp/io.hpp"

namespace roughmdp::roughpath {

namespace {

void check_depth(int depth) {
  if (depth != 2 && depth != 3)
    throw ValidationError("lift depth must be 2 or 3, got " + std::to_string(depth));
}

inline Eigen::Index idx3(int d, int i, int j, int k) {
  return static_cast<Eigen::Index>((i * d + j) * d + k);
}

} // namespace

IncrementTensors IncrementTensors::zero(int dim, int depth) {
  check_depth(depth);
  IncrementTensors t;
  t.dim = dim;
  t.depth = depth;
  t.x1 = Eigen::VectorXd::Zero(dim);
  t.x2 = Eigen::MatrixXd::Zero(dim, dim);
  if (depth == 3) t.x3 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim) * dim * dim);
  return t;
}

IncrementTensors chen_combine(const IncrementTensors& a, const IncrementTensors& b) {
  if (a.dim != b.dim || a.depth != b.depth)
    throw ValidationError("chen_combine: dimension/depth mismatch");
  const int d = a.dim;
  IncrementTensors out;
  out.dim = d;
  out.depth = a.depth;
  out.x1 = a.x1 + b.x1;
  out.x2 = a.x2 + b.x2 + a.x1 * b.x1.transpose();
  if (a.depth == 3) {
    out.x3 = a.x3 + b.x3;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          out.x3[idx3(d, i, j, k)] += a.x1[i] * b.x2(j, k) + a.x2(i, j) * b.x1[k];
  }
  return out;
}

IncrementTensors dilate(const IncrementTensors& a, double c) {
  IncrementTensors out = a;
  out.x1 *= c;
  out.x2 *= c * c;
  if (out.depth == 3) out.x3 *= c * c * c;
  return out;
}

RoughPathLift::RoughPathLift(const TimeGrid& grid, int dim, int depth,
                             std::vector<IncrementTensors> intervals)
    : grid_(grid), dim_(dim), depth_(depth), intervals_(std::move(intervals)) {
  check_depth(depth);
  if (intervals_.size() != grid.n_intervals())
    throw ValidationError("lift interval count does not match grid");
}

IncrementTensors RoughPathLift::over(std::size_t i, std::size_t j) const {
  if (i > j || j > n_intervals())
    throw ValidationError("RoughPathLift::over: bad interval range");
  IncrementTensors acc = IncrementTensors::zero(dim_, depth_);
  for (std::size_t k = i; k < j; ++k) acc = chen_combine(acc, intervals_[k]);
  return acc;
}

void RoughPathLift::write_csv(std::ostream& os) const {
  os << "interval,level,multi_index,value\n";
  const int d = dim_;
  for (std::size_t n = 0; n < intervals_.size(); ++n) {
    const auto& t = intervals_[n];
    for (int i = 0; i < d; ++i)
      os << n << ",1," << i << "," << io::format_double(t.x1[i]) << "\n";
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        os << n << ",2," << i << "." << j << "," << io::format_double(t.x2(i, j)) << "\n";
    if (depth_ == 3)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k)
            os << n << ",3," << i << "." << j << "." << k << ","
               << io::format_double(t.x3[idx3(d, i, j, k)]) << "\n";
  }
}

RoughPathLift lift_piecewise_linear(const TimeGrid& grid, const Eigen::MatrixXd& path,
                                    int depth) {
  check_depth(depth);
  if (path.rows() != static_cast<Eigen::Index>(grid.n_nodes()))
    throw ValidationError("path row count does not match grid nodes");
  const int d = static_cast<int>(path.cols());
  std::vector<IncrementTensors> intervals;
  intervals.reserve(grid.n_intervals());
  for (std::size_t n = 0; n < grid.n_intervals(); ++n) {
    IncrementTensors t;
    t.dim = d;
    t.depth = depth;
    t.x1 = path.row(static_cast<Eigen::Index>(n) + 1) - path.row(static_cast<Eigen::Index>(n));
    t.x2 = 0.5 * (t.x1 * t.x1.transpose());
    if (depth == 3) {
      t.x3.resize(static_cast<Eigen::Index>(d) * d * d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k)
            t.x3[idx3(d, i, j, k)] = t.x1[i] * t.x1[j] * t.x1[k] / 6.0;
    }
    intervals.push_back(std::move(t));
  }
  return RoughPathLift(grid, d, depth, std::move(intervals));
}

int depth_for_hurst(fbm::HurstParam h) { return h.value() > 1.0 / 3.0 ? 2 : 3; }

RoughPathLift dilate(const RoughPathLift& x, double c) {
  if (!std::isfinite(c)) throw ValidationError("dilation factor must be finite");
  std::vector<IncrementTensors> scaled;
  scaled.reserve(x.n_intervals());
  for (std::size_t i = 0; i < x.n_intervals(); ++i) scaled.push_back(dilate(x.interval(i), c));
  return RoughPathLift(x.grid(), x.dim(), x.depth(), std::move(scaled));
}

std::vector<double> holder_estimate(const RoughPathLift& x, double alpha) {
  if (!(alpha > 0.25) || !(alpha <= 0.5))
    throw ValidationError("alpha must lie in (0.25, 0.5]");
  const std::size_t n = x.n_intervals();
  std::vector<double> best(static_cast<std::size_t>(x.depth()), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    IncrementTensors acc = IncrementTensors::zero(x.dim(), x.depth());
    for (std::size_t j = i + 1; j <= n; ++j) {
      acc = chen_combine(acc, x.interval(j - 1));
      const double dt = x.grid().node(j) - x.grid().node(i);
      best[0] = std::max(best[0], acc.x1.norm() / std::pow(dt, alpha));
      best[1] = std::max(best[1], acc.x2.norm() / std::pow(dt, 2.0 * alpha));
      if (x.depth() == 3)
        best[2] = std::max(best[2], acc.x3.norm() / std::pow(dt, 3.0 * alpha));
    }
  }
  return best;
}

} // namespace roughmdp::roughpath
