#include "labyrinth/domain.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "labyrinth/error.hpp"
#include "labyrinth/geometry.hpp"
#include "labyrinth/sampling.hpp"

namespace lab::convex {

namespace {

bool quadratic(const ConvexDomain& D) { return D.name() != "superellipse"; }

// Inverse of f(x) = 2x^3 + x.
double cubic_inverse(double y) {
  double lo = -std::max(1.0, std::cbrt(std::abs(y)));
  double hi = -lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = 2.0 * mid * mid * mid + mid;
    (f < y ? lo : hi) = mid;
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

// Optimizes phi(n) over unit n. sign = +1 minimizes, -1 maximizes.
template <typename F>
Vec optimize_direction(int d, F&& phi, double sign) {
  auto value = [&](const Vec& n) { return sign * phi(n); };
  if (d == 2) {
    auto dir = [](double a) {
      Vec n(2);
      n << std::cos(a), std::sin(a);
      return n;
    };
    constexpr int grid = 256;
    const double step = 2.0 * std::numbers::pi / grid;
    std::vector<double> vals(grid);
    for (int i = 0; i < grid; ++i) vals[i] = value(dir(i * step));
    double best_angle = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
      const double prev = vals[(i + grid - 1) % grid];
      const double next = vals[(i + 1) % grid];
      if (vals[i] > prev || vals[i] > next) continue;
      double lo = (i - 1) * step;
      double hi = (i + 1) * step;
      constexpr double inv_phi = 0.6180339887498949;
      double x1 = hi - inv_phi * (hi - lo);
      double x2 = lo + inv_phi * (hi - lo);
      double f1 = value(dir(x1));
      double f2 = value(dir(x2));
      for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = value(dir(x1));
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = value(dir(x2));
        }
      }
      const double a = f1 <= f2 ? x1 : x2;
      const double f = std::min(f1, f2);
      if (f < best) {
        best = f;
        best_angle = a;
      }
    }
    return dir(best_angle);
  }
  // d >= 3: best of a sphere sampling, then a shrinking pattern search.
  Vec n;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& u : sampling::sphere_candidates(d, 800 * static_cast<std::size_t>(d - 1))) {
    const double f = value(u);
    if (f < best) {
      best = f;
      n = u;
    }
  }
  double h = 0.1;
  while (h > 1e-12) {
    const Mat basis = geom::tangent_basis(n);
    bool improved = false;
    for (int a = 0; a < d - 1; ++a) {
      for (double s : {h, -h}) {
        const Vec trial = (n + s * basis.col(a)).normalized();
        const double f = value(trial);
        if (f < best) {
          best = f;
          n = trial;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return n;
}

}  // namespace

ConvexDomain ConvexDomain::ball(int d) {
  require(d >= 2 && d <= kMaxDim, ErrorKind::kInvalidInput, "domain: dimension out of range");
  ConvexDomain D;
  D.kind_ = DomainKind::kBall;
  D.dim_ = d;
  D.name_ = "ball";
  D.shape_ = Mat::Identity(d, d);
  D.shape_inverse_ = Mat::Identity(d, d);
  return D;
}

ConvexDomain ConvexDomain::ellipsoid(const Mat& shape) {
  const int d = static_cast<int>(shape.rows());
  require(d >= 2 && d <= kMaxDim && shape.cols() == d, ErrorKind::kInvalidInput,
          "ellipsoid: shape must be square with 2 <= d <= 8");
  require(shape.allFinite(), ErrorKind::kInvalidInput, "ellipsoid: non-finite shape matrix");
  require((shape - shape.transpose()).norm() <= 1e-12 * std::max(1.0, shape.norm()),
          ErrorKind::kNotSpd, "ellipsoid: shape matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(shape);
  require(eig.eigenvalues().minCoeff() > 1e-10, ErrorKind::kNotSpd,
          "ellipsoid: shape matrix is not positive definite");
  ConvexDomain D;
  D.kind_ = DomainKind::kEllipsoid;
  D.dim_ = d;
  D.name_ = "ellipsoid";
  D.shape_ = shape;
  D.shape_inverse_ = shape.inverse();
  return D;
}

ConvexDomain ConvexDomain::preset(const std::string& name, int d) {
  require(d >= 2 && d <= kMaxDim, ErrorKind::kInvalidInput, "domain: dimension out of range");
  ConvexDomain D;
  D.kind_ = DomainKind::kSmooth;
  D.dim_ = d;
  D.name_ = name;
  D.shape_ = Mat::Identity(d, d);
  if (name == "ellipse") {
    D.shape_(0, 0) = 0.25;
  } else {
    require(name == "superellipse", ErrorKind::kInvalidInput,
            "domain: unknown preset '" + name + "' (expected ellipse or superellipse)");
  }
  D.shape_inverse_ = D.shape_.inverse();
  return D;
}

double ConvexDomain::value(const Vec& x) const {
  if (quadratic(*this)) return x.dot(shape_ * x) - 1.0;
  return 0.5 * (x.array().pow(4).sum() + x.squaredNorm()) - 1.0;
}

Vec ConvexDomain::gradient(const Vec& x) const {
  if (quadratic(*this)) return 2.0 * (shape_ * x);
  return (2.0 * x.array().cube() + x.array()).matrix();
}

Mat ConvexDomain::hessian(const Vec& x) const {
  if (quadratic(*this)) return 2.0 * shape_;
  Mat H = Mat::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) H(i, i) = 6.0 * x(i) * x(i) + 1.0;
  return H;
}

double ConvexDomain::gauge(const Vec& x) const {
  if (quadratic(*this)) return std::sqrt(std::max(0.0, x.dot(shape_ * x)));
  const double s2 = x.squaredNorm();
  if (s2 == 0.0) return 0.0;
  const double s4 = x.array().pow(4).sum();
  // (u^4 s4 + u^2 s2)/2 = 1 with u = 1/gauge.
  const double u2 = 4.0 / (s2 + std::sqrt(s2 * s2 + 8.0 * s4));
  return 1.0 / std::sqrt(u2);
}

Vec ConvexDomain::support_point(const Vec& n) const {
  if (quadratic(*this)) {
    const Vec y = shape_inverse_ * n;
    return y / std::sqrt(n.dot(y));
  }
  auto point = [&](double lambda) {
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i) x(i) = cubic_inverse(lambda * n(i));
    return x;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (value(point(hi)) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (value(point(mid)) < 0.0 ? lo : hi) = mid;
  }
  return point(0.5 * (lo + hi));
}

double ConvexDomain::body_distance(const Vec& x, double scale, Vec* nearest) const {
  if (gauge(x) <= scale) {
    if (nearest) *nearest = x;
    return 0.0;
  }
  if (kind_ == DomainKind::kBall) {
    const double r = x.norm();
    if (nearest) *nearest = x * (scale / r);
    return r - scale;
  }
  const Vec n = optimize_direction(
      dim_, [&](const Vec& u) { return u.dot(x) - scale * support(u); }, -1.0);
  const Vec p = scale * support_point(n);
  if (nearest) *nearest = p;
  return (x - p).norm();
}

double ConvexDomain::boundary_distance(const Vec& x, double scale, Vec* nearest) const {
  if (gauge(x) >= scale) return body_distance(x, scale, nearest);
  if (kind_ == DomainKind::kBall) {
    const double r = x.norm();
    if (nearest) *nearest = r > 0.0 ? Vec(x * (scale / r)) : Vec(scale * unit(dim_, 0));
    return scale - r;
  }
  const Vec n = optimize_direction(
      dim_, [&](const Vec& u) { return scale * support(u) - u.dot(x); }, 1.0);
  const Vec p = scale * support_point(n);
  if (nearest) *nearest = p;
  return (x - p).norm();
}

double ConvexDomain::inradius() const { return boundary_distance(zeros(dim_)); }

double ConvexDomain::circumradius() const {
  if (quadratic(*this)) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(shape_);
    return 1.0 / std::sqrt(eig.eigenvalues().minCoeff());
  }
  double r = 0.0;
  for (const Vec& b : boundary_samples(4096)) r = std::max(r, b.norm());
  return r;
}

std::vector<Vec> ConvexDomain::boundary_samples(std::size_t count) const {
  std::vector<Vec> out;
  out.reserve(count);
  if (dim_ == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      Vec u(2);
      u << std::cos(angle), std::sin(angle);
      out.push_back(u / gauge(u));
    }
    return out;
  }
  for (const Vec& u : sampling::sphere_samples(dim_, count, 0)) out.push_back(u / gauge(u));
  return out;
}

void ConvexDomain::validate_strict_convexity(std::size_t samples) const {
  for (const Vec& b : boundary_samples(samples)) {
    const Vec g = gradient(b);
    require(g.norm() > 0.0, ErrorKind::kDegenerateHessian, "domain: vanishing gradient on the boundary");
    const Mat E = geom::tangent_basis(g);
    const Mat HT = E.transpose() * hessian(b) * E;
    Eigen::SelfAdjointEigenSolver<Mat> eig(HT);
    require(eig.eigenvalues().minCoeff() > 1e-9 * g.norm(), ErrorKind::kDegenerateHessian,
            "domain: tangential Hessian is not positive definite on the boundary");
  }
}

}  // namespace lab::convex
