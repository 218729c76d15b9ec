#pragma once

#include <cstdint>
#include <vector>

#include "labyrinth/types.hpp"

namespace lab::nets {

/// Classes F_1..F_m of unit vectors: each class r-separated, their union
/// covering the sphere within c*r. Some classes may be empty; m is fixed by
/// (d, c) through class_capacity, not by the particular net.
struct SeparatedNet {
  int dim = 0;
  double r = 0.0;
  double c = 0.0;
  int m = 0;
  std::vector<std::vector<Vec>> classes;
  double candidate_cover = 0.0;  // covering bound of the candidate set used
  std::uint64_t seed = 0;

  std::vector<Vec> points() const;
  std::size_t size() const;
};

/// Result of a farthest-point net: points plus the bound on their covering radius.
struct GreedyNet {
  std::vector<Vec> points;
  double covering_bound = 0.0;  // max distance from a sphere point to the net
};

/// Maximal delta-separated subset of S^{d-1} by farthest-point greedy over
/// sphere_candidates. Separation >= delta (relative tolerance 1e-12); covering
/// radius <= delta + candidate covering bound.
std::vector<Vec> greedy_net(int d, double delta, std::uint64_t seed);

/// Same as greedy_net but selects with threshold `delta` over a candidate set
/// whose own covering radius is at most `candidate_eps`.
GreedyNet greedy_net_with_candidates(int d, double delta, double candidate_eps, std::uint64_t seed);

/// Largest candidate set greedy_net will build.
inline constexpr std::size_t kCandidateBudget = 4'000'000;

/// Partition into classes with pairwise distance >= r inside each class, by
/// greedy coloring of the proximity graph (edge iff distance < r) in
/// decreasing-degree order, ties by index.
std::vector<std::vector<Vec>> color_net(const std::vector<Vec>& points, double r);

/// Same coloring returning the class index of each input point.
std::vector<int> color_indices(const std::vector<Vec>& points, double r);

/// Packing bound on 1 + max degree of the r-proximity graph of any
/// (c*r)-separated subset of S^{d-1}; greedy coloring never exceeds it.
int proximity_degree_bound(int d, double c, double r);

/// Number of classes m for (d, c): the sup of the degree bound over r in
/// (0, 1], and never below the bound at `r` itself.
int class_capacity(int d, double c, double r);

/// Runs greedy_net at delta = c*r - eps (eps = candidate covering bound) so the
/// union covers within c*r, then colors at threshold r into m classes.
SeparatedNet build_separated_families(int d, double r, double c_target, std::uint64_t seed);

/// max over `samples` quasi-uniform sphere points of the distance to `points`.
double covering_radius(const std::vector<Vec>& points, int d, std::size_t samples, std::uint64_t seed);

/// Documented sampling resolution of covering_radius: 4 * samples^{-1/(d-1)}.
double covering_sample_slack(int d, std::size_t samples);

/// Volumetric bound (1 + 2/c)^{d-1} * 3^d on m.
double volumetric_class_bound(int d, double c);

}  // namespace lab::nets
