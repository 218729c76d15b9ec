#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "labyrinth/error.hpp"
#include "labyrinth/geometry.hpp"
#include "labyrinth/kd_tree.hpp"
#include "labyrinth/linear_program.hpp"
#include "support/helpers.hpp"

using namespace lab;
using testing::vec;

namespace {

// Dense parametric minimization of |a + s(b - a) - (c + rho u)| over the
// segment and the planar disc, independent of the closed forms.
double brute_segment_distance(const Vec& a, const Vec& b, const geom::FlatBall& ball) {
  const Mat basis = geom::tangent_basis(ball.normal);
  double best = 1e300;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const Vec p = a + (b - a) * (static_cast<double>(i) / n);
    for (int k = 0; k <= n; ++k) {
      const double s = ball.radius * (2.0 * k / n - 1.0);
      best = std::min(best, (p - (ball.center + s * basis.col(0))).norm());
    }
  }
  return best;
}

}  // namespace

TEST_CASE("flat ball construction validates input") {
  const auto fb = geom::make_flat_ball(vec({0.5, 0}), vec({2, 0}), 0.2);
  CHECK(fb.normal.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(geom::make_flat_ball(vec({0, 0}), vec({0, 0}), 0.2), Error);
  CHECK_THROWS_AS(geom::make_flat_ball(vec({0, 0}), vec({1, 0}), -1.0), Error);
}

TEST_CASE("segment against flat ball: worked cases") {
  const auto fb = geom::make_flat_ball(vec({0.5, 0}), vec({1, 0}), 0.2);
  CHECK(geom::segment_flatball_intersect({fb.center - fb.normal, fb.center + fb.normal}, fb, 0.0));
  CHECK(geom::segment_flatball_intersect({vec({0, 0}), vec({1, 0})}, fb, 0.0));
  CHECK_FALSE(geom::segment_flatball_intersect({vec({0, 0.3}), vec({1, 0.3})}, fb, 0.0));
  CHECK(geom::segment_flatball_intersect({vec({0, 0.3}), vec({1, 0.3})}, fb, 0.15));
  CHECK(geom::Disc(fb).segment_distance(vec({0, 0.3}), vec({1, 0.3})) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("segment distance agrees with dense brute force") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto fb = geom::make_flat_ball(vec({u(rng), u(rng)}), vec({u(rng), u(rng)}), 0.1 + 0.4 * std::abs(u(rng)));
    const Vec a = vec({u(rng), u(rng)});
    const Vec b = vec({u(rng), u(rng)});
    const double exact = geom::Disc(fb).segment_distance(a, b);
    const double brute = brute_segment_distance(a, b, fb);
    // The brute grid spacing bounds its overestimate.
    CHECK(exact <= brute + 1e-12);
    CHECK(brute - exact < 4e-3);
  }
}

TEST_CASE("point distance to flat ball") {
  const auto fb = geom::make_flat_ball(vec({0.5, 0}), vec({1, 0}), 0.2);
  CHECK(geom::point_flatball_distance(fb.center, fb) == doctest::Approx(0.0));
  CHECK(geom::point_flatball_distance(fb.center + fb.normal, fb) == doctest::Approx(1.0));
  CHECK(geom::point_flatball_distance(vec({0.5, 0.5}), fb) == doctest::Approx(0.3));

  // d = 3 against random samples of the disc.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const auto ball3 = geom::make_flat_ball(vec({0.1, 0.2, 0.3}), vec({1, 2, 2}), 0.5);
  const Mat basis = geom::tangent_basis(ball3.normal);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = vec({g(rng), g(rng), g(rng)});
    double brute = 1e300;
    for (int i = 0; i <= 200; ++i) {
      for (int k = 0; k < 200; ++k) {
        const double rho = ball3.radius * i / 200.0;
        const double th = 2.0 * std::numbers::pi * k / 200.0;
        const Vec y = ball3.center + rho * (std::cos(th) * basis.col(0) + std::sin(th) * basis.col(1));
        brute = std::min(brute, (x - y).norm());
      }
    }
    const double exact = geom::point_flatball_distance(x, ball3);
    CHECK(exact <= brute + 1e-12);
    CHECK(brute - exact < 1e-2);
  }
}

TEST_CASE("mapped disc matches the image of the flat ball") {
  const auto fb = geom::make_flat_ball(vec({0.3, 0.2}), vec({0.6, 0.8}), 0.1);
  Mat map(2, 2);
  map << 2, 0, 0, 1;
  const geom::Disc disc(fb, map);
  const auto rim = disc.rim_samples(2);
  const Mat basis = geom::tangent_basis(fb.normal);
  const Vec e0 = map * (fb.center + fb.radius * basis.col(0));
  const Vec e1 = map * (fb.center - fb.radius * basis.col(0));
  CHECK(std::min((rim[0] - e0).norm(), (rim[0] - e1).norm()) < 1e-12);
  CHECK(std::min((rim[1] - e0).norm(), (rim[1] - e1).norm()) < 1e-12);
  for (const Vec& p : rim) CHECK(disc.distance(p) < 1e-12);
}

TEST_CASE("extremal points") {
  const auto fb2 = geom::make_flat_ball(vec({0.5, 0}), vec({1, 0}), 0.2);
  const auto pts2 = geom::flatball_extremal_points(fb2, 2);
  REQUIRE(pts2.size() == 3);
  CHECK((pts2[2] - fb2.center).norm() < 1e-15);
  CHECK(std::abs(pts2[0](1)) == doctest::Approx(0.2));
  CHECK(pts2[0](1) == doctest::Approx(-pts2[1](1)));

  const auto fb3 = geom::make_flat_ball(vec({0, 0, 0}), vec({0, 0, 1}), 1.0);
  const auto pts3 = geom::flatball_extremal_points(fb3, 8);
  REQUIRE(pts3.size() == 9);
  // Largest angular gap of the 8 rim points, by brute force over the circle.
  double worst = 0.0;
  for (int k = 0; k < 3600; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 3600;
    const Vec dir = vec({std::cos(th), std::sin(th), 0});
    double best = 1e300;
    for (int i = 0; i < 8; ++i) best = std::min(best, std::acos(std::clamp(pts3[i].dot(dir), -1.0, 1.0)));
    worst = std::max(worst, best);
  }
  CHECK(2.0 * worst <= std::numbers::pi / 2 + 1e-9);
  for (const Vec& p : pts3) CHECK(geom::point_flatball_distance(p, fb3) < 1e-12);
  CHECK_THROWS_AS(geom::flatball_extremal_points(fb3, 3), Error);
}

TEST_CASE("separating hyperplane witnesses") {
  std::vector<Vec> left, right;
  for (int i = 0; i <= 10; ++i) {
    left.push_back(vec({0, -1 + 0.2 * i}));
    right.push_back(vec({5, -1 + 0.2 * i}));
  }
  const auto plane = geom::separating_hyperplane(left, right, 1.0);
  REQUIRE(plane.has_value());
  CHECK(std::abs(plane->normal(1)) < 1e-9);
  CHECK(plane->offset / plane->normal(0) == doctest::Approx(2.5));
  CHECK(geom::separation_margin(*plane, left, right) >= 1.0 - 1e-9);
  CHECK_FALSE(geom::separating_hyperplane(left, left, 0.0).has_value());

  // Two tangent segments on a circle, checked on a 10x denser sampling.
  auto samples = [](double angle, int n) {
    const auto fb = geom::make_flat_ball(vec({std::cos(angle), std::sin(angle)}), vec({std::cos(angle), std::sin(angle)}), 0.2);
    std::vector<Vec> out;
    const Mat basis = geom::tangent_basis(fb.normal);
    for (int i = 0; i <= n; ++i) out.push_back(fb.center + fb.radius * (2.0 * i / n - 1.0) * basis.col(0));
    return out;
  };
  const auto a = samples(0.0, 4);
  const auto b = samples(0.6, 4);
  const auto w = geom::separating_hyperplane(a, b, 1e-6);
  REQUIRE(w.has_value());
  CHECK(geom::separation_margin(*w, samples(0.0, 40), samples(0.6, 40)) >= 1e-6);
}

TEST_CASE("disc gap bounds bracket the true distance") {
  const auto a = geom::make_flat_ball(vec({0, 0, 0}), vec({0, 0, 1}), 1.0);
  const auto b = geom::make_flat_ball(vec({0, 0, 0.5}), vec({1, 0, 0}), 0.3);
  const auto gap = geom::disc_gap(geom::Disc(a), geom::Disc(b));
  CHECK(gap.lower <= gap.upper + 1e-12);
  CHECK(gap.upper == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(gap.lower > 0.19);
}

TEST_CASE("linear program: small known optimum") {
  // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3  ->  x = 3, y = 1, value 11
  Eigen::VectorXd c(2);
  c << 3, 2;
  Eigen::MatrixXd A(3, 2);
  A << 1, 1, 1, 3, 1, 0;
  Eigen::VectorXd b(3);
  b << 4, 6, 3;
  const auto res = lp::maximize(c, A, b);
  REQUIRE(res.status == lp::Status::kOptimal);
  CHECK(res.objective == doctest::Approx(11.0));
  CHECK(res.x(0) == doctest::Approx(3.0));
  CHECK(res.x(1) == doctest::Approx(1.0));

  Eigen::MatrixXd A2(1, 2);
  A2 << 1, -1;
  Eigen::VectorXd b2(1);
  b2 << 1;
  CHECK(lp::maximize(c, A2, b2).status == lp::Status::kUnbounded);
}

TEST_CASE("kd tree matches brute force") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back(vec({u(rng), u(rng), u(rng)}));
  const KdTree tree(pts);
  for (int q = 0; q < 50; ++q) {
    const Vec x = vec({u(rng), u(rng), u(rng)});
    std::vector<std::size_t> got;
    tree.radius_search(x, 0.3, got);
    std::sort(got.begin(), got.end());
    std::vector<std::size_t> want;
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if ((pts[i] - x).norm() <= 0.3) want.push_back(i);
      if ((pts[i] - x).norm() < (pts[nearest] - x).norm()) nearest = i;
    }
    CHECK(got == want);
    CHECK(tree.nearest(x) == nearest);
    const auto knn = tree.knn(x, 5);
    CHECK(knn.front().second == nearest);
    for (std::size_t i = 1; i < knn.size(); ++i) CHECK(knn[i - 1].first <= knn[i].first);
  }
}
