#pragma once

#include <cstddef>
#include <cstdint>

#include "roughmdp/errors.hpp"

namespace roughmdp {

/// Uniform dyadic partition of [0,1]: nodes t_i = i / 2^m, i = 0..2^m.
/// Only dyadic grids are supported; they keep the exact sampler and the
/// lift formulas simple, and every transform size stays a power of two.
class TimeGrid {
public:
  explicit TimeGrid(int level) : level_(level) {
    if (level < 0 || level > 26)
      throw ValidationError("grid_level must be in [0, 26], got " + std::to_string(level));
  }

  int level() const { return level_; }
  std::size_t n_intervals() const { return std::size_t{1} << level_; }
  std::size_t n_nodes() const { return n_intervals() + 1; }
  double mesh() const { return 1.0 / static_cast<double>(n_intervals()); }
  double node(std::size_t i) const { return static_cast<double>(i) * mesh(); }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) { return a.level_ == b.level_; }

private:
  int level_;
};

} // namespace roughmdp
