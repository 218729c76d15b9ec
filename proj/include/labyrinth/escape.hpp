#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "labyrinth/domain.hpp"
#include "labyrinth/geometry.hpp"
#include "labyrinth/labyrinth.hpp"

namespace lab::escape {

/// Sampling region of the roadmap: the gauge shell inner < gauge(x) < outer of
/// a convex domain, or an axis-aligned box.
struct Region {
  enum class Kind { kShell, kBox };
  Kind kind = Kind::kShell;
  std::shared_ptr<const convex::ConvexDomain> domain;
  double inner = 0.0;
  double outer = 1.0;
  Vec lo;
  Vec hi;

  static Region shell(std::shared_ptr<const convex::ConvexDomain> domain, double inner, double outer);
  static Region box(const Vec& lo, const Vec& hi);

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x) const;
  double volume_estimate() const;
};

/// Source or target set of an escape: a point, a closed body scale*D (reached
/// from outside), or the boundary of scale*D (reached from inside).
struct Terminal {
  enum class Kind { kPoint, kBody, kBoundary };
  Kind kind = Kind::kPoint;
  Vec point;
  std::shared_ptr<const convex::ConvexDomain> domain;
  double scale = 1.0;

  static Terminal at(const Vec& p);
  static Terminal body(std::shared_ptr<const convex::ConvexDomain> domain, double scale);
  static Terminal boundary(std::shared_ptr<const convex::ConvexDomain> domain, double scale);

  double distance(const Vec& x, Vec* nearest = nullptr) const;
};

/// Components as discs with a uniform-grid index for segment queries.
class Obstacles {
 public:
  Obstacles() = default;
  Obstacles(std::vector<geom::Disc> discs, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return discs_.size(); }
  const geom::Disc& operator[](std::size_t i) const { return discs_[i]; }
  const std::vector<geom::Disc>& discs() const { return discs_; }

  bool segment_free(const Vec& a, const Vec& b, double clearance) const;
  /// Same predicate checked against every disc, without the index.
  bool segment_free_exhaustive(const Vec& a, const Vec& b, double clearance) const;
  bool point_free(const Vec& x, double clearance) const;
  /// Closest disc within `within` of x, if any.
  std::optional<std::size_t> nearest(const Vec& x, double within) const;

 private:
  template <typename F>
  bool visit_box(const Vec& lo, const Vec& hi, F&& f) const;

  int dim_ = 0;
  int axes_ = 0;
  std::vector<geom::Disc> discs_;
  Vec origin_;
  double cell_ = 1.0;
  std::vector<int> cells_;  // per indexed axis
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> cell_items_;
  std::vector<std::uint32_t> oversized_;  // discs not worth rasterizing
};

struct Roadmap {
  std::vector<Vec> nodes;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency;
  std::size_t free_nodes = 0;
  std::size_t rim_nodes = 0;
  double clearance = 0.0;
  double connection_radius = 0.0;  // typical free-sample spacing

  std::size_t edge_count() const;
};

struct EscapePath {
  std::vector<Vec> polyline;
  double length = 0.0;
  double clearance = 0.0;
};

double polyline_length(const std::vector<Vec>& points);

/// Offset distance of rim nodes beyond the clearance for a disc of the given size.
double rim_step(double radius);

/// Seed-independent part of every roadmap: one node just beyond each rim
/// sample of every component, and the free edges between nearby rim nodes.
struct RimGraph {
  std::vector<Vec> nodes;
  std::vector<std::uint32_t> owner;  // disc each rim node belongs to
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  double clearance = 0.0;
};

RimGraph build_rim_graph(const Region& region, const Obstacles& obstacles, double clearance);

Roadmap build_roadmap(const Region& region, const Obstacles& obstacles, std::size_t node_budget,
                      double clearance, std::uint64_t seed);
Roadmap build_roadmap(const Region& region, const Obstacles& obstacles, const RimGraph& rim,
                      std::size_t node_budget, std::uint64_t seed);

/// Shortest roadmap path from the source set to the target set, including the
/// straight connections from nodes to their nearest terminal points.
std::optional<EscapePath> shortest_escape(const Roadmap& roadmap, const Obstacles& obstacles,
                                          const Terminal& source, const Terminal& target);

/// Randomized two-point shortcutting plus vertex relaxation and terminal
/// re-projection. Never lengthens the path.
EscapePath shortcut(const EscapePath& path, const Obstacles& obstacles, const Terminal& source,
                    const Terminal& target, int rounds, std::uint64_t seed);

/// Every segment clear of every disc at the path's clearance, endpoints on
/// the terminals within 1e-9, stored length consistent.
bool certify(const EscapePath& path, const Obstacles& obstacles, const Terminal& source,
             const Terminal& target);

struct Effort {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  std::vector<std::size_t> budgets{20000, 80000};
  int shortcut_rounds = 400;
  double clearance = 0.0;

  /// 4 seeds x {2e4, 8e4} nodes in d = 2, halved budgets for d >= 3.
  static Effort standard(int dim);
};

struct Attempt {
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::optional<double> length;
};

struct EscapeReport {
  std::optional<EscapePath> best;
  std::vector<Attempt> attempts;
  std::string note;
};

struct EscapeProblem {
  Region region;
  Terminal source;
  Terminal target;
  Obstacles obstacles;
};

/// Region and terminals implied by a labyrinth's domain descriptor.
EscapeProblem escape_problem(const Labyrinth& lab);

/// Multi-start search over seeds x budgets. The best length is an upper bound
/// on the true infimum: a search that finds nothing short proves nothing.
EscapeReport min_escape_length(const EscapeProblem& problem, const Effort& effort);
EscapeReport min_escape_length(const Labyrinth& lab, const Effort& effort);

}  // namespace lab::escape
