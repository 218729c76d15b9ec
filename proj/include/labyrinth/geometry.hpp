#pragma once

#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "labyrinth/types.hpp"

namespace lab::geom {

/// The plane {x : normal . x = offset}; `normal` has unit length.
struct Hyperplane {
  Vec normal;
  double offset = 0.0;

  double evaluate(const Vec& x) const { return normal.dot(x) - offset; }
};

/// Position of a component in the construction: shell j, sublevel k, index p.
struct LevelTag {
  int j = 0;
  int k = 0;
  int p = 0;

  friend auto operator<=>(const LevelTag&, const LevelTag&) = default;
};

/// Closed (d-1)-dimensional ball {center + v : v . normal = 0, |v| <= radius}.
struct FlatBall {
  Vec center;
  Vec normal;
  double radius = 0.0;
  std::optional<LevelTag> level;

  int dim() const { return static_cast<int>(center.size()); }
};

/// Validates and normalizes; throws invalid-input on a zero normal or non-positive radius.
FlatBall make_flat_ball(const Vec& center, const Vec& normal, double radius,
                        std::optional<LevelTag> level = std::nullopt);

struct Segment {
  Vec a;
  Vec b;

  double length() const { return (b - a).norm(); }
};

/// Orthonormal basis (d x (d-1)) of the hyperplane orthogonal to `normal`.
Mat tangent_basis(const Vec& normal);

/// World-space image of a flat ball under an optional linear map:
/// {center + basis * u : |u| <= 1}. Without a map, or when the map keeps the
/// ball round, distance queries use closed forms.
class Disc {
 public:
  explicit Disc(const FlatBall& ball);
  Disc(const FlatBall& ball, const Mat& map);

  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  const Vec& normal() const { return normal_; }
  const Mat& basis() const { return basis_; }
  bool round() const { return round_; }
  double bounding_radius() const { return bounding_radius_; }

  Vec project(const Vec& x) const;
  double distance(const Vec& x) const { return (x - project(x)).norm(); }

  /// max over the disc of w . x
  double support(const Vec& w) const;

  /// Distance from the segment [a, b] to the disc.
  double segment_distance(const Vec& a, const Vec& b) const;

  /// dist([a, b], disc) <= clearance (clearance 0 uses the exact crossing test).
  bool segment_hits(const Vec& a, const Vec& b, double clearance) const;

  /// `count` rim points (2 in d = 2) followed by the center.
  std::vector<Vec> rim_samples(int count) const;

 private:
  void finish_setup();
  Vec solve_trust_region(const Vec& y) const;

  Vec center_;
  Vec normal_;
  Mat basis_;
  bool round_ = true;
  double radius_ = 0.0;
  double bounding_radius_ = 0.0;
  Mat gram_vectors_;
  Vec gram_values_;
};

double point_flatball_distance(const Vec& x, const FlatBall& ball);

bool segment_flatball_intersect(const Segment& seg, const FlatBall& ball, double clearance);

/// Boundary points of the ball followed by its center. `count` must be at least
/// 2(d-1); in d = 2 the boundary is exactly the two endpoints.
std::vector<Vec> flatball_extremal_points(const FlatBall& ball, int count);

/// Smallest count accepted by flatball_extremal_points.
int min_extremal_count(int dim);

/// Unit directions on S^{n-1} used for rim sampling: the 2 points {+-1} for
/// n = 1, equally spaced angles for n = 2, a farthest-point prefix for n >= 3.
std::vector<Vec> rim_directions(int n, int count);

/// Bounds on the distance between two discs. `lower` comes from a separating
/// direction certificate, `upper` from the alternating-projection pair.
struct DiscGap {
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
};

DiscGap disc_gap(const Disc& first, const Disc& second, int max_iterations = 20000);

/// Hyperplane with normal . x >= offset + margin on `first` and
/// normal . x <= offset - margin on `second`, found by a margin-maximizing LP.
/// std::nullopt means no witness at this margin, not a proof of inseparability.
std::optional<Hyperplane> separating_hyperplane(std::span<const Vec> first,
                                                std::span<const Vec> second, double margin);

/// Achieved margin of `plane` on the two sets (min over both sides).
double separation_margin(const Hyperplane& plane, std::span<const Vec> first,
                         std::span<const Vec> second);

}  // namespace lab::geom
