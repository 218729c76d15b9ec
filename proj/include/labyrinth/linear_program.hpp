#pragma once

#include <Eigen/Core>

namespace lab::lp {

enum class Status { kOptimal, kUnbounded, kIterationLimit };

struct Result {
  Status status = Status::kIterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// maximize c.x subject to A x <= b, x >= 0, with b >= 0 so the origin is a
/// basic feasible start. Dense tableau simplex with Bland's rule: deterministic
/// and cycle-free, intended for small problems.
Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                int max_pivots = 10000);

}  // namespace lab::lp
