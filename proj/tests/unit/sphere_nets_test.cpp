#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "labyrinth/sampling.hpp"
#include "labyrinth/sphere_nets.hpp"
#include "support/helpers.hpp"

using namespace lab;
using testing::vec;

namespace {

double min_pairwise(const std::vector<Vec>& pts) {
  double best = 1e300;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, (pts[i] - pts[j]).norm());
  }
  return best;
}

// Covering radius by exhaustive nearest-point search over Gaussian samples.
double brute_covering(const std::vector<Vec>& pts, int d, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = g(rng);
    x.normalize();
    double best = 1e300;
    for (const Vec& p : pts) best = std::min(best, (x - p).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("greedy net: antipodal pair at delta 2") {
  for (int d : {2, 3, 4}) {
    const auto net = nets::greedy_net(d, 2.0, 5);
    REQUIRE(net.size() == 2);
    CHECK((net[0] + net[1]).norm() < 1e-12);
  }
}

TEST_CASE("greedy net: square at delta sqrt 2") {
  const auto net = nets::greedy_net(2, std::sqrt(2.0), 1);
  REQUIRE(net.size() == 4);
  CHECK(min_pairwise(net) >= std::sqrt(2.0) * (1 - 1e-12));
  // Angular grid of 1e5 points.
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 100000;
    const Vec x = vec({std::cos(th), std::sin(th)});
    double best = 1e300;
    for (const Vec& p : net) best = std::min(best, (x - p).norm());
    worst = std::max(worst, best);
  }
  CHECK(worst == doctest::Approx(2.0 * std::sin(std::numbers::pi / 8)).epsilon(1e-3));
}

TEST_CASE("greedy net: d = 3, delta = 1 is maximal") {
  // Farthest-point order finds the octahedron (6 points, covering 0.919);
  // first-fit orders reach 10 to 14. Either is a maximal 1-separated set.
  const auto net = nets::greedy_net(3, 1.0, 1);
  CHECK(net.size() >= 6);
  CHECK(net.size() <= 14);
  CHECK(min_pairwise(net) >= 1.0 * (1 - 1e-12));
  CHECK(brute_covering(net, 3, 100000, 2) < 1.0);
}

TEST_CASE("coloring: partition law and square example") {
  const std::vector<Vec> square = {vec({1, 0}), vec({0, 1}), vec({-1, 0}), vec({0, -1})};
  const auto classes = nets::color_net(square, 1.5);
  REQUIRE(classes.size() == 2);
  for (const auto& cl : classes) {
    REQUIRE(cl.size() == 2);
    CHECK((cl[0] + cl[1]).norm() < 1e-12);
  }
  const auto one = nets::color_net(square, 1.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 4);

  const auto pts = nets::greedy_net(3, 0.3, 4);
  const auto idx = nets::color_indices(pts, 0.9);
  REQUIRE(idx.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (idx[i] == idx[j]) CHECK((pts[i] - pts[j]).norm() >= 0.9);
    }
  }
}

TEST_CASE("separated families: brute-force invariants") {
  for (int d : {2, 3}) {
    std::set<int> ms;
    for (double r : {0.1, 0.2, 0.4}) {
      const auto net = nets::build_separated_families(d, r, 0.45, 1);
      ms.insert(net.m);
      CHECK(net.m <= nets::volumetric_class_bound(d, 0.45));
      CHECK(static_cast<int>(net.classes.size()) == net.m);
      for (const auto& cl : net.classes) {
        if (cl.size() > 1) CHECK(min_pairwise(cl) >= r);
      }
      for (const Vec& p : net.points()) CHECK(std::abs(p.norm() - 1.0) < 1e-12);
      const int samples = d == 2 ? 20000 : 5000;
      CHECK(brute_covering(net.points(), d, samples, 9) <= 0.45 * r + nets::covering_sample_slack(d, samples));
      if (d == 2 && r == 0.4) {
        CHECK(net.size() >= 25);
        CHECK(net.size() <= 45);
        CHECK(net.m >= 3);
        CHECK(net.m <= 7);
      }
    }
    CHECK(ms.size() == 1);
  }
}

TEST_CASE("covering radius estimator: worked values") {
  const Vec p = vec({1, 0});
  CHECK(nets::covering_radius({p}, 2, 100000, 1) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(nets::covering_radius({p, -p}, 2, 100000, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  const std::vector<Vec> square = {vec({1, 0}), vec({0, 1}), vec({-1, 0}), vec({0, -1})};
  CHECK(nets::covering_radius(square, 2, 100000, 1) ==
        doctest::Approx(2.0 * std::sin(std::numbers::pi / 8)).epsilon(1e-3));
}

TEST_CASE("nets are deterministic in the seed") {
  const auto a = nets::build_separated_families(3, 0.3, 0.45, 7);
  const auto b = nets::build_separated_families(3, 0.3, 0.45, 7);
  REQUIRE(a.size() == b.size());
  const auto pa = a.points();
  const auto pb = b.points();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);
}
