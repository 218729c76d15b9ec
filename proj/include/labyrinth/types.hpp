#pragma once

#include <Eigen/Core>

namespace lab {

// Largest supported ambient dimension. Vectors keep inline storage so the hot
// geometric loops never touch the heap.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

/// Every numerical tolerance used by the library lives here.
struct Tolerances {
  double predicate = 1e-10;        // geometric predicates and 1-d minimization
  double lp_margin_floor = 1e-6;   // smallest margin accepted as a separation witness
  double unit_norm = 1e-12;        // |normal| = 1 check
  double disjoint_distance = 1e-9; // alternating projection stopping tolerance
};

inline constexpr Tolerances kTol{};

inline Vec zeros(int d) { return Vec::Zero(d); }

inline Vec unit(int d, int axis) {
  Vec v = Vec::Zero(d);
  v(axis) = 1.0;
  return v;
}

}  // namespace lab
