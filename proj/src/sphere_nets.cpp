#include "labyrinth/sphere_nets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "labyrinth/error.hpp"
#include "labyrinth/kd_tree.hpp"
#include "labyrinth/sampling.hpp"

namespace lab::nets {

namespace {

// Normalized area of the spherical cap of angular radius theta on S^{d-1}.
double cap_measure(int d, double theta) {
  if (d == 3) return 1.0 - std::cos(theta);
  constexpr int steps = 4000;
  const double h = theta / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * std::pow(std::sin(i * h), d - 2);
  }
  return sum * h / 3.0;
}

std::size_t checked_candidate_count(int d, double eps) {
  const std::size_t n = sampling::candidate_count_for(d, eps);
  require(n <= kCandidateBudget, ErrorKind::kResourceLimit,
          "greedy_net: candidate budget exceeded (d = " + std::to_string(d) +
              ", resolution " + std::to_string(eps) + ")");
  return n;
}

}  // namespace

std::vector<Vec> SeparatedNet::points() const {
  std::vector<Vec> out;
  for (const auto& cls : classes) out.insert(out.end(), cls.begin(), cls.end());
  return out;
}

std::size_t SeparatedNet::size() const {
  std::size_t n = 0;
  for (const auto& cls : classes) n += cls.size();
  return n;
}

namespace {

GreedyNet net_over_candidates(int d, double delta, std::size_t n, std::uint64_t seed) {
  const auto candidates = sampling::sphere_candidates(d, n);
  double gap = 0.0;
  const auto picks =
      sampling::farthest_point_traversal(candidates, 0, delta, candidates.size(), seed, &gap);
  GreedyNet net;
  net.points.reserve(picks.size());
  for (std::size_t i : picks) net.points.push_back(candidates[i]);
  net.covering_bound = gap + sampling::candidate_covering_bound(d, candidates.size());
  return net;
}

void check_net_arguments(int d, double delta) {
  require(d >= 2 && d <= kMaxDim, ErrorKind::kInvalidInput, "greedy_net: dimension out of range");
  require(delta > 0.0 && delta <= 2.0, ErrorKind::kInvalidInput, "greedy_net: delta must lie in (0, 2]");
}

}  // namespace

GreedyNet greedy_net_with_candidates(int d, double delta, double candidate_eps, std::uint64_t seed) {
  check_net_arguments(d, delta);
  return net_over_candidates(d, delta, checked_candidate_count(d, candidate_eps), seed);
}

std::vector<Vec> greedy_net(int d, double delta, std::uint64_t seed) {
  check_net_arguments(d, delta);
  std::size_t n = checked_candidate_count(d, delta / 8.0);
  // Circle grids keep the quarter turns, so symmetric nets come out exact.
  if (d == 2) n += (4 - n % 4) % 4;
  return net_over_candidates(d, delta, n, seed).points;
}

std::vector<int> color_indices(const std::vector<Vec>& points, double r) {
  require(!points.empty(), ErrorKind::kInvalidInput, "color_net: empty point set");
  require(r > 0.0, ErrorKind::kInvalidInput, "color_net: r must be positive");
  const std::size_t n = points.size();
  const KdTree tree(points);
  std::vector<std::vector<std::size_t>> adjacency(n);
  std::vector<std::size_t> nearby;
  for (std::size_t i = 0; i < n; ++i) {
    tree.radius_search(points[i], r, nearby);
    for (std::size_t j : nearby) {
      if (j != i && (points[i] - points[j]).norm() < r) adjacency[i].push_back(j);
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return adjacency[a].size() > adjacency[b].size();
  });
  std::vector<int> color(n, -1);
  std::vector<char> taken;
  for (std::size_t v : order) {
    taken.assign(adjacency[v].size() + 1, 0);
    for (std::size_t u : adjacency[v]) {
      const int cu = color[u];
      if (cu >= 0 && cu < static_cast<int>(taken.size())) taken[cu] = 1;
    }
    int c = 0;
    while (taken[c]) ++c;
    color[v] = c;
  }
  return color;
}

std::vector<std::vector<Vec>> color_net(const std::vector<Vec>& points, double r) {
  const auto color = color_indices(points, r);
  const int count = *std::max_element(color.begin(), color.end()) + 1;
  std::vector<std::vector<Vec>> classes(count);
  for (std::size_t i = 0; i < points.size(); ++i) classes[color[i]].push_back(points[i]);
  return classes;
}

int proximity_degree_bound(int d, double c, double r) {
  const double alpha = 2.0 * std::asin(std::min(r, 2.0) / 2.0);
  const double beta = 2.0 * std::asin(std::min(c * r, 2.0) / 2.0);
  if (d == 2) {
    const int per_side = static_cast<int>(std::ceil(alpha / beta - 1e-12)) - 1;
    const int around = static_cast<int>(std::floor(2.0 * std::numbers::pi / beta + 1e-12)) - 1;
    return 1 + std::min(2 * per_side, around);
  }
  const double outer = std::min(alpha + beta / 2.0, std::numbers::pi);
  const double ratio = cap_measure(d, outer) / cap_measure(d, beta / 2.0);
  return std::max(1, static_cast<int>(std::floor(ratio + 1e-9)));
}

int class_capacity(int d, double c, double r) {
  int m = proximity_degree_bound(d, c, std::min(r, 2.0));
  m = std::max(m, proximity_degree_bound(d, c, 1e-6));
  for (int i = 1; i <= 1000; ++i) m = std::max(m, proximity_degree_bound(d, c, i / 1000.0));
  return m;
}

SeparatedNet build_separated_families(int d, double r, double c_target, std::uint64_t seed) {
  require(c_target > 0.0 && c_target < 0.5, ErrorKind::kInvalidInput,
          "build_separated_families: need 0 < c < 1/2");
  require(r > 0.0 && c_target * r <= 2.0, ErrorKind::kInvalidInput,
          "build_separated_families: need 0 < c*r <= 2");
  const double target = c_target * r;
  const double eps = target / 8.0;
  const GreedyNet net = greedy_net_with_candidates(d, target - eps, eps, seed);

  SeparatedNet out;
  out.dim = d;
  out.r = r;
  out.c = c_target;
  out.seed = seed;
  out.candidate_cover = eps;
  out.m = class_capacity(d, c_target, r);
  const auto color = color_indices(net.points, r);
  const int used = *std::max_element(color.begin(), color.end()) + 1;
  require(used <= out.m, ErrorKind::kIntegrity,
          "build_separated_families: coloring exceeded the class capacity");
  out.classes.assign(out.m, {});
  for (std::size_t i = 0; i < net.points.size(); ++i) out.classes[color[i]].push_back(net.points[i]);
  return out;
}

double covering_radius(const std::vector<Vec>& points, int d, std::size_t samples, std::uint64_t seed) {
  require(!points.empty(), ErrorKind::kInvalidInput, "covering_radius: empty point set");
  const KdTree tree(points);
  double worst = 0.0;
  for (const Vec& q : sampling::sphere_samples(d, samples, seed)) {
    double dist = 0.0;
    tree.nearest(q, &dist);
    worst = std::max(worst, dist);
  }
  return worst;
}

double covering_sample_slack(int d, std::size_t samples) {
  return 4.0 * std::pow(static_cast<double>(samples), -1.0 / (d - 1));
}

double volumetric_class_bound(int d, double c) {
  return std::pow(1.0 + 2.0 / c, d - 1) * std::pow(3.0, d);
}

}  // namespace lab::nets
