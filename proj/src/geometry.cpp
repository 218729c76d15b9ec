#include "labyrinth/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "labyrinth/error.hpp"
#include "labyrinth/linear_program.hpp"
#include "labyrinth/sampling.hpp"

namespace lab::geom {

namespace {

double point_segment_distance(const Vec& x, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (x - (a + s * ab)).norm();
}

// Golden-section search of a convex function on [0, 1]; returns the minimum value.
template <typename F>
double minimize_convex(F&& f, double tolerance) {
  constexpr double inv_phi = 0.6180339887498949;
  double lo = 0.0;
  double hi = 1.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > tolerance; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, f(0.0), f(1.0)});
}

}  // namespace

FlatBall make_flat_ball(const Vec& center, const Vec& normal, double radius,
                        std::optional<LevelTag> level) {
  require(center.size() >= 2 && center.size() == normal.size(), ErrorKind::kInvalidInput,
          "flat ball: center and normal must share a dimension >= 2");
  require(center.allFinite() && normal.allFinite(), ErrorKind::kInvalidInput,
          "flat ball: non-finite coordinates");
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::kInvalidInput,
          "flat ball: radius must be positive");
  const double norm = normal.norm();
  require(norm > 0.0, ErrorKind::kInvalidInput, "flat ball: zero normal");
  return FlatBall{center, normal / norm, radius, level};
}

Mat tangent_basis(const Vec& normal) {
  const auto d = normal.size();
  Eigen::MatrixXd frame(d, d);
  frame.col(0) = normal.normalized();
  frame.rightCols(d - 1) = Eigen::MatrixXd::Identity(d, d - 1);
  // Householder QR of [n | e_1 .. e_{d-1}]: the trailing columns of Q span n's complement.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
  Eigen::MatrixXd q = qr.householderQ();
  Mat basis = q.rightCols(d - 1);
  return basis;
}

Disc::Disc(const FlatBall& ball)
    : center_(ball.center), normal_(ball.normal), basis_(ball.radius * tangent_basis(ball.normal)),
      radius_(ball.radius) {
  finish_setup();
}

Disc::Disc(const FlatBall& ball, const Mat& map) {
  require(map.rows() == ball.dim() && map.cols() == ball.dim(), ErrorKind::kInvalidInput,
          "disc: map shape mismatch");
  center_ = map * ball.center;
  basis_ = map * (ball.radius * tangent_basis(ball.normal));
  const Mat inverse_transpose = map.inverse().transpose();
  normal_ = (inverse_transpose * ball.normal).normalized();
  finish_setup();
}

void Disc::finish_setup() {
  const Mat gram = basis_.transpose() * basis_;
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  gram_values_ = eig.eigenvalues();
  gram_vectors_ = eig.eigenvectors();
  const double largest = gram_values_.maxCoeff();
  const double smallest = gram_values_.minCoeff();
  require(smallest > 0.0, ErrorKind::kInvalidInput, "disc: degenerate map");
  bounding_radius_ = std::sqrt(largest);
  round_ = (largest - smallest) <= 1e-12 * largest;
  radius_ = bounding_radius_;
}

Vec Disc::solve_trust_region(const Vec& y) const {
  // minimize |y - B u| subject to |u| <= 1 via the secular equation on lambda.
  const Vec g = gram_vectors_.transpose() * (basis_.transpose() * y);
  auto u_norm = [&](double lambda) {
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      const double c = g(i) / (gram_values_(i) + lambda);
      s += c * c;
    }
    return std::sqrt(s);
  };
  double lambda = 0.0;
  if (u_norm(0.0) > 1.0) {
    double lo = 0.0;
    double hi = g.norm();
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (u_norm(mid) > 1.0 ? lo : hi) = mid;
    }
    lambda = hi;
  }
  Vec coeffs(g.size());
  for (int i = 0; i < g.size(); ++i) coeffs(i) = g(i) / (gram_values_(i) + lambda);
  return gram_vectors_ * coeffs;
}

Vec Disc::project(const Vec& x) const {
  const Vec y = x - center_;
  if (round_) {
    const Vec in_plane = y - normal_.dot(y) * normal_;
    const double len = in_plane.norm();
    if (len <= radius_) return center_ + in_plane;
    return center_ + in_plane * (radius_ / len);
  }
  return center_ + basis_ * solve_trust_region(y);
}

double Disc::support(const Vec& w) const {
  return w.dot(center_) + (basis_.transpose() * w).norm();
}

double Disc::segment_distance(const Vec& a, const Vec& b) const {
  const double len = (b - a).norm();
  if (len == 0.0) return distance(a);
  const Vec ab = b - a;
  return minimize_convex([&](double s) { return distance(a + s * ab); },
                         kTol.predicate / std::max(len, 1e-300));
}

bool Disc::segment_hits(const Vec& a, const Vec& b, double clearance) const {
  if (point_segment_distance(center_, a, b) > bounding_radius_ + clearance + kTol.predicate) {
    return false;
  }
  const double ha = normal_.dot(a - center_);
  const double hb = normal_.dot(b - center_);
  const bool in_plane = std::abs(ha) <= kTol.predicate && std::abs(hb) <= kTol.predicate;
  if (in_plane) return segment_distance(a, b) <= std::max(clearance, kTol.predicate);
  if ((ha <= 0.0 && hb >= 0.0) || (ha >= 0.0 && hb <= 0.0)) {
    const double s = ha / (ha - hb);
    if (distance(a + s * (b - a)) <= std::max(clearance, kTol.predicate)) return true;
  }
  if (clearance <= kTol.predicate) return false;
  return segment_distance(a, b) <= clearance;
}

std::vector<Vec> Disc::rim_samples(int count) const {
  std::vector<Vec> out;
  for (const Vec& u : rim_directions(dim() - 1, count)) out.push_back(center_ + basis_ * u);
  out.push_back(center_);
  return out;
}

double point_flatball_distance(const Vec& x, const FlatBall& ball) {
  return Disc(ball).distance(x);
}

bool segment_flatball_intersect(const Segment& seg, const FlatBall& ball, double clearance) {
  require(clearance >= 0.0, ErrorKind::kInvalidInput, "clearance must be nonnegative");
  return Disc(ball).segment_hits(seg.a, seg.b, clearance);
}

int min_extremal_count(int dim) { return 2 * (dim - 1); }

std::vector<Vec> rim_directions(int n, int count) {
  std::vector<Vec> out;
  if (n == 1) {
    Vec p(1);
    p(0) = 1.0;
    out.push_back(p);
    out.push_back(-p);
    return out;
  }
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / count;
      Vec p(2);
      p << std::cos(angle), std::sin(angle);
      out.push_back(p);
    }
    return out;
  }
  return sampling::farthest_point_prefix(n, count);
}

std::vector<Vec> flatball_extremal_points(const FlatBall& ball, int count) {
  require(count >= min_extremal_count(ball.dim()), ErrorKind::kInvalidInput,
          "extremal points: count below 2(d-1)");
  return Disc(ball).rim_samples(count);
}

DiscGap disc_gap(const Disc& first, const Disc& second, int max_iterations) {
  DiscGap gap;
  Vec y = second.project(first.center());
  Vec x = first.project(y);
  for (int it = 0; it < max_iterations; ++it) {
    y = second.project(x);
    x = first.project(y);
    gap.iterations = it + 1;
    const Vec w = second.project(x) - x;
    const double upper = w.norm();
    gap.upper = upper;
    if (upper <= kTol.disjoint_distance * 1e-3) {
      gap.lower = 0.0;
      return gap;
    }
    const double lower = (-second.support(-w) - first.support(w)) / upper;
    gap.lower = std::max(gap.lower, lower);
    if (upper - gap.lower <= kTol.disjoint_distance * std::max(1.0, upper)) break;
  }
  gap.lower = std::max(gap.lower, 0.0);
  return gap;
}

double separation_margin(const Hyperplane& plane, std::span<const Vec> first,
                         std::span<const Vec> second) {
  double margin = std::numeric_limits<double>::infinity();
  for (const Vec& x : first) margin = std::min(margin, plane.evaluate(x));
  for (const Vec& x : second) margin = std::min(margin, -plane.evaluate(x));
  return margin;
}

std::optional<Hyperplane> separating_hyperplane(std::span<const Vec> first,
                                                std::span<const Vec> second, double margin) {
  require(!first.empty() && !second.empty(), ErrorKind::kInvalidInput,
          "separating_hyperplane: empty point set");
  require(margin >= 0.0, ErrorKind::kInvalidInput, "separating_hyperplane: negative margin");
  const auto d = first.front().size();

  // Center and scale for conditioning.
  Vec mean = Vec::Zero(d);
  for (const Vec& x : first) mean += x;
  for (const Vec& x : second) mean += x;
  mean /= static_cast<double>(first.size() + second.size());
  double scale = 0.0;
  for (const Vec& x : first) scale = std::max(scale, (x - mean).norm());
  for (const Vec& x : second) scale = std::max(scale, (x - mean).norm());
  if (scale == 0.0) return std::nullopt;

  auto normalized = [&](const Vec& x) -> Vec { return (x - mean) / scale; };

  // Variables: w+ (d), w- (d), b+, b-, mu. Maximize mu.
  const Eigen::Index vars = 2 * d + 3;
  const Eigen::Index mu = 2 * d + 2;
  struct Row {
    bool in_first;
    std::size_t index;
  };
  std::vector<Row> active;
  std::vector<char> used_first(first.size(), 0);
  std::vector<char> used_second(second.size(), 0);
  auto activate = [&](bool in_first, std::size_t i) {
    auto& used = in_first ? used_first : used_second;
    if (used[i]) return;
    used[i] = 1;
    active.push_back({in_first, i});
  };

  Vec mean_first = Vec::Zero(d);
  Vec mean_second = Vec::Zero(d);
  for (const Vec& x : first) mean_first += x;
  for (const Vec& x : second) mean_second += x;
  mean_first /= static_cast<double>(first.size());
  mean_second /= static_cast<double>(second.size());
  std::vector<Vec> seeds{mean_first - mean_second};
  for (Eigen::Index a = 0; a < d; ++a) seeds.push_back(unit(static_cast<int>(d), static_cast<int>(a)));
  for (const Vec& dir : seeds) {
    if (dir.norm() == 0.0) continue;
    auto extreme = [&](std::span<const Vec> set, double sign) {
      std::size_t best = 0;
      double value = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < set.size(); ++i) {
        const double v = sign * dir.dot(set[i]);
        if (v < value) {
          value = v;
          best = i;
        }
      }
      return best;
    };
    activate(true, extreme(first, 1.0));
    activate(false, extreme(second, -1.0));
  }

  Vec w(d);
  double b = 0.0;
  double mu_value = 0.0;
  for (int round = 0; round < 500; ++round) {
    const Eigen::Index rows = static_cast<Eigen::Index>(active.size()) + 2 * d + 3;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, vars);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    Eigen::Index r = 0;
    for (const Row& row : active) {
      const Vec p = normalized(row.in_first ? first[row.index] : second[row.index]);
      const double sign = row.in_first ? -1.0 : 1.0;  // first: -w.x + b + mu <= 0
      for (Eigen::Index a = 0; a < d; ++a) {
        A(r, a) = sign * p(a);
        A(r, d + a) = -sign * p(a);
      }
      A(r, 2 * d) = -sign;
      A(r, 2 * d + 1) = sign;
      A(r, mu) = 1.0;
      ++r;
    }
    for (Eigen::Index a = 0; a < 2 * d; ++a, ++r) {
      A(r, a) = 1.0;
      rhs(r) = 1.0;
    }
    A(r, 2 * d) = 1.0;
    rhs(r++) = 4.0 * static_cast<double>(d);
    A(r, 2 * d + 1) = 1.0;
    rhs(r++) = 4.0 * static_cast<double>(d);
    A(r, mu) = 1.0;
    rhs(r++) = 1.0;

    Eigen::VectorXd objective = Eigen::VectorXd::Zero(vars);
    objective(mu) = 1.0;
    const lp::Result res = lp::maximize(objective, A, rhs);
    if (res.status != lp::Status::kOptimal) return std::nullopt;
    for (Eigen::Index a = 0; a < d; ++a) w(a) = res.x(a) - res.x(d + a);
    b = res.x(2 * d) - res.x(2 * d + 1);
    mu_value = res.x(mu);
    if (mu_value <= 1e-14 || w.norm() == 0.0) return std::nullopt;

    // Add the most violated constraints of the full problem.
    std::vector<std::pair<double, Row>> violations;
    for (std::size_t i = 0; i < first.size(); ++i) {
      const double v = -w.dot(normalized(first[i])) + b + mu_value;
      if (v > 1e-12 && !used_first[i]) violations.push_back({v, {true, i}});
    }
    for (std::size_t i = 0; i < second.size(); ++i) {
      const double v = w.dot(normalized(second[i])) - b + mu_value;
      if (v > 1e-12 && !used_second[i]) violations.push_back({v, {false, i}});
    }
    if (violations.empty()) break;
    std::sort(violations.begin(), violations.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      if (x.second.in_first != y.second.in_first) return x.second.in_first;
      return x.second.index < y.second.index;
    });
    const std::size_t take = std::min<std::size_t>(violations.size(), 16);
    for (std::size_t i = 0; i < take; ++i) activate(violations[i].second.in_first, violations[i].second.index);
  }

  // Back to world coordinates: w.(x - mean)/scale >= b + mu.
  const double norm = w.norm();
  Hyperplane plane{w / norm, (w.dot(mean) + scale * b) / norm};
  const double achieved = separation_margin(plane, first, second);
  if (!(achieved > 0.0) || achieved < margin) return std::nullopt;
  return plane;
}

}  // namespace lab::geom
