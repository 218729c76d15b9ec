#pragma once

#include <string>
#include <vector>

#include "labyrinth/types.hpp"

namespace lab::convex {

enum class DomainKind { kBall, kEllipsoid, kSmooth };

/// A bounded convex domain {rho < 0} containing the origin.
///
/// Ellipsoids are {x : x^T A x < 1}. Smooth domains are the named presets
/// "ellipse" (x1^2/4 + sum x_i^2 < 1, handled as an ellipsoid) and
/// "superellipse" (sum x_i^4/2 + sum x_i^2/2 < 1).
class ConvexDomain {
 public:
  static ConvexDomain ball(int d);
  static ConvexDomain ellipsoid(const Mat& shape);
  static ConvexDomain preset(const std::string& name, int d);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const Mat& shape() const { return shape_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  /// Minkowski functional: x lies on the boundary of gauge(x) * D.
  double gauge(const Vec& x) const;

  /// Boundary point with outward unit normal `n` (maximizer of n.x over D).
  Vec support_point(const Vec& n) const;
  double support(const Vec& n) const { return n.dot(support_point(n)); }

  /// Distance from x to the boundary of scale*D, and the closest boundary point.
  double boundary_distance(const Vec& x, double scale = 1.0, Vec* nearest = nullptr) const;

  /// Distance from x to the closed body scale*D (0 inside).
  double body_distance(const Vec& x, double scale = 1.0, Vec* nearest = nullptr) const;

  double inradius() const;
  double circumradius() const;

  /// Quasi-uniform boundary samples (angle grid in d = 2, radial images of
  /// sphere samples otherwise).
  std::vector<Vec> boundary_samples(std::size_t count) const;

  /// Checks positive definiteness of the tangential Hessian on `samples`
  /// boundary points; throws degenerate-hessian on failure.
  void validate_strict_convexity(std::size_t samples) const;

 private:
  DomainKind kind_ = DomainKind::kBall;
  int dim_ = 0;
  std::string name_;
  Mat shape_;
  Mat shape_inverse_;
};

}  // namespace lab::convex
