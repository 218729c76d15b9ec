#include "labyrinth/linear_program.hpp"

#include <limits>

#include "labyrinth/error.hpp"

namespace lab::lp {

Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                int max_pivots) {
  const Eigen::Index rows = A.rows();
  const Eigen::Index vars = A.cols();
  require(c.size() == vars && b.size() == rows, ErrorKind::kInvalidInput, "lp: shape mismatch");
  require((b.array() >= 0.0).all(), ErrorKind::kInvalidInput, "lp: rhs must be nonnegative");

  constexpr double eps = 1e-12;
  const Eigen::Index cols = vars + rows;
  // Row 0 holds reduced costs; column `cols` holds the right-hand side.
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(rows + 1, cols + 1);
  tab.block(1, 0, rows, vars) = A;
  tab.block(1, vars, rows, rows).setIdentity();
  tab.block(1, cols, rows, 1) = b;
  tab.block(0, 0, 1, vars) = -c.transpose();

  std::vector<Eigen::Index> basis(rows);
  for (Eigen::Index i = 0; i < rows; ++i) basis[i] = vars + i;

  Result result;
  for (int pivot = 0; pivot < max_pivots; ++pivot) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (tab(0, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) {
      result.status = Status::kOptimal;
      break;
    }
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i <= rows; ++i) {
      const double coef = tab(i, enter);
      if (coef <= eps) continue;
      const double ratio = tab(i, cols) / coef;
      if (ratio < best - eps || (ratio <= best + eps && leave >= 0 && basis[i - 1] < basis[leave - 1])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) {
      result.status = Status::kUnbounded;
      return result;
    }
    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index i = 0; i <= rows; ++i) {
      if (i == leave) continue;
      const double factor = tab(i, enter);
      if (factor != 0.0) tab.row(i) -= factor * tab.row(leave);
    }
    basis[leave - 1] = enter;
  }

  result.x = Eigen::VectorXd::Zero(vars);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (basis[i] < vars) result.x(basis[i]) = tab(i + 1, cols);
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace lab::lp
