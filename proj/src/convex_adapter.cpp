#include "labyrinth/convex_adapter.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "labyrinth/ball_labyrinth.hpp"
#include "labyrinth/error.hpp"
#include "labyrinth/kd_tree.hpp"
#include "labyrinth/sampling.hpp"
#include "labyrinth/sphere_nets.hpp"

namespace lab::convex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec outward_normal(const ConvexDomain& domain, const Vec& b) { return domain.gradient(b).normalized(); }

// Largest principal curvature of the boundary at b.
double max_curvature(const ConvexDomain& domain, const Vec& b) {
  const Vec g = domain.gradient(b);
  const Mat E = geom::tangent_basis(g);
  const Mat HT = E.transpose() * domain.hessian(b) * E / g.norm();
  Eigen::SelfAdjointEigenSolver<Mat> eig(HT);
  return eig.eigenvalues().maxCoeff();
}

// Depth of x in the domain, negative outside.
double depth(const ConvexDomain& domain, const Vec& x) {
  const double dist = domain.boundary_distance(x);
  return domain.value(x) < 0.0 ? dist : -dist;
}

// Sphere of radius r around c, `count` points.
std::vector<Vec> sphere_points(const Vec& c, double r, std::size_t count) {
  std::vector<Vec> out;
  for (const Vec& u : geom::rim_directions(static_cast<int>(c.size()), static_cast<int>(count))) {
    out.push_back(c + r * u);
  }
  return out;
}

struct CollarTest {
  const ConvexDomain& domain;
  double eta;
  double inradius;
  double circumradius;

  // y in V = {x in D : depth(x) < eta}, with gauge shortcuts before the exact depth.
  bool operator()(const Vec& y) const {
    const double g = domain.gauge(y);
    if (g >= 1.0) return false;
    if ((1.0 - g) * inradius >= eta) return false;
    if ((1.0 - g) * circumradius < eta) return true;
    return domain.boundary_distance(y) < eta;
  }
};

double measure_delta_with(const ConvexDomain& domain, const std::vector<Vec>& centers,
                          const std::vector<double>& radii, double eta, std::size_t samples) {
  const CollarTest in_collar{domain, eta, domain.inradius(), domain.circumradius()};
  const std::size_t k = centers.size();
  std::vector<std::vector<Vec>> rims(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (const Vec& y : sphere_points(centers[i], radii[i], samples)) {
      if (in_collar(y)) rims[i].push_back(y);
    }
  }
  auto inside = [&](const Vec& y, std::size_t l) { return (y - centers[l]).norm() < radii[l]; };
  double delta = kInf;
  for (std::size_t j = 0; j < k; ++j) {
    if (rims[j].empty()) continue;
    std::vector<Vec> others;  // boundary of the union of the other patches
    for (std::size_t i = 0; i < k; ++i) {
      if (i == j) continue;
      for (const Vec& y : rims[i]) {
        bool covered = false;
        for (std::size_t l = 0; l < k && !covered; ++l) covered = l != i && l != j && inside(y, l);
        if (!covered) others.push_back(y);
      }
    }
    if (others.empty()) continue;
    const KdTree tree(others);
    for (const Vec& y : rims[j]) {
      double dist = 0.0;
      tree.nearest(y, &dist);
      delta = std::min(delta, dist);
    }
  }
  return delta;
}

}  // namespace

// ------------------------------------------------------------- ellipsoids

Normalization normalize_ellipsoid(const Mat& shape) {
  require(shape.rows() == shape.cols() && shape.rows() >= 2, ErrorKind::kInvalidInput,
          "normalize_ellipsoid: shape must be square");
  require((shape - shape.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + shape.cwiseAbs().maxCoeff()),
          ErrorKind::kNotSpd, "normalize_ellipsoid: shape matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(shape);
  const Vec values = eig.eigenvalues();
  require(values.minCoeff() > 1e-10, ErrorKind::kNotSpd,
          "normalize_ellipsoid: shape matrix is not positive definite");
  Normalization n;
  n.T = eig.eigenvectors() * values.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  n.T_inverse = eig.eigenvectors() * values.cwiseSqrt().cwiseInverse().asDiagonal() *
                eig.eigenvectors().transpose();
  n.norm = std::sqrt(values.maxCoeff());
  n.inverse_norm = 1.0 / std::sqrt(values.minCoeff());
  return n;
}

Labyrinth pullback_labyrinth(const Labyrinth& ball_labyrinth, const Mat& shape) {
  require(ball_labyrinth.domain.type == DomainType::kBall, ErrorKind::kInvalidInput,
          "pullback: source labyrinth must live in the unit ball");
  require(shape.rows() == ball_labyrinth.dim, ErrorKind::kInvalidInput, "pullback: dimension mismatch");
  const Normalization n = normalize_ellipsoid(shape);
  Labyrinth out = ball_labyrinth;
  out.domain.type = DomainType::kEllipsoid;
  out.domain.shape = shape;
  for (auto& c : out.components) {
    require(!c.map.has_value(), ErrorKind::kInvalidInput, "pullback: component already mapped");
    c.map = n.T_inverse;
  }
  return out;
}

// ------------------------------------------------------------ osculation

Vec OsculatingMap::to_local(const Vec& y) const {
  return unit(static_cast<int>(point.size()), 0) + linear * (y - point);
}

Vec OsculatingMap::from_local(const Vec& z) const {
  return point + inverse * (z - unit(static_cast<int>(point.size()), 0));
}

OsculatingMap osculating_map(const ConvexDomain& domain, const Vec& x, double deviation_bound) {
  const int d = domain.dim();
  require(x.size() == d, ErrorKind::kInvalidInput, "osculating_map: dimension mismatch");
  require(std::abs(domain.value(x)) < 1e-9, ErrorKind::kInvalidInput,
          "osculating_map: point is not on the boundary");
  require(deviation_bound > 0.0, ErrorKind::kInvalidInput, "osculating_map: deviation bound must be positive");
  const Vec g = domain.gradient(x);
  require(g.norm() > 0.0, ErrorKind::kInvalidInput, "osculating_map: vanishing gradient");
  const Vec nu = g.normalized();
  const Mat E = geom::tangent_basis(nu);
  const Mat HT = E.transpose() * domain.hessian(x) * E / g.norm();
  Eigen::SelfAdjointEigenSolver<Mat> eig(HT);
  require(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff()),
          ErrorKind::kDegenerateHessian, "osculating_map: tangential Hessian is not positive definite");
  const Mat B = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();

  // z1 = 1 + nu.h, z_T = B E^T h: the boundary matches |z| = 1 to second order.
  OsculatingMap map;
  map.point = x;
  map.deviation_bound = deviation_bound;
  map.linear = Mat::Zero(d, d);
  map.linear.row(0) = nu.transpose();
  map.linear.bottomRows(d - 1) = B * E.transpose();
  map.inverse = map.linear.inverse();

  // Walk boundary points away from x along tangent directions until the
  // chart image leaves the deviation bound.
  const double reach = 2.0 * domain.circumradius();
  constexpr int kSteps = 400;
  const auto directions = geom::rim_directions(d - 1, 16 * (d - 1));
  double radius = kInf;
  for (const Vec& u : directions) {
    const Vec t = E * u;
    double last_ok = 0.0;
    for (int s = 1; s <= kSteps; ++s) {
      const Vec p = x + (reach * s / kSteps) * t;
      const Vec y = p / domain.gauge(p);
      const double dist = (y - x).norm();
      if (dist <= last_ok || std::abs(map.to_local(y).norm() - 1.0) > deviation_bound) break;
      last_ok = dist;
    }
    radius = std::min(radius, last_ok);
  }
  map.validity_radius = radius;
  // Deviation actually attained inside the final radius.
  map.deviation = 0.0;
  for (const Vec& u : directions) {
    const Vec t = E * u;
    for (int s = 1; s <= kSteps; ++s) {
      const Vec p = x + (reach * s / kSteps) * t;
      const Vec y = p / domain.gauge(p);
      if ((y - x).norm() > radius) break;
      map.deviation = std::max(map.deviation, std::abs(map.to_local(y).norm() - 1.0));
    }
  }
  return map;
}

// ---------------------------------------------------------------- covers

bool covers_boundary(const ConvexDomain& domain, const PatchCover& cover, std::size_t samples) {
  for (const Vec& b : domain.boundary_samples(samples)) {
    bool covered = false;
    for (std::size_t i = 0; i < cover.centers.size() && !covered; ++i) {
      covered = (b - cover.centers[i]).norm() < cover.radii[i];
    }
    if (!covered) return false;
  }
  return true;
}

double measure_delta(const ConvexDomain& domain, const PatchCover& cover, std::size_t samples) {
  return measure_delta_with(domain, cover.centers, cover.radii, cover.eta, samples);
}

PatchCover patch_cover(const ConvexDomain& domain, double patch_radius, double eta, std::size_t samples) {
  require(patch_radius > 0.0 && eta > 0.0, ErrorKind::kInvalidInput, "patch_cover: radius and eta must be positive");
  require(samples >= 16, ErrorKind::kInvalidInput, "patch_cover: need at least 16 samples");
  const double inradius = domain.inradius();
  require(eta < 0.5 * inradius, ErrorKind::kInvalidInput,
          "patch_cover: eta must be below half the inradius (" + std::to_string(0.5 * inradius) + ")");
  const std::size_t boundary_count = domain.dim() == 2 ? 4096 : 20000;
  const std::vector<Vec> boundary = domain.boundary_samples(boundary_count);

  PatchCover cover;
  cover.eta = eta;
  cover.samples = samples;
  // Greedy placement at 0.8 R leaves overlaps wide enough for a positive delta.
  for (const Vec& b : boundary) {
    bool covered = false;
    for (const Vec& c : cover.centers) covered = covered || (b - c).norm() < 0.8 * patch_radius;
    if (!covered) cover.centers.push_back(b);
  }
  // The greedy pass can close the loop with a nearly coincident patch; drop
  // centers the others cover with margin (0.9 R).
  for (std::size_t idx = cover.centers.size(); idx-- > 0 && cover.centers.size() > 1;) {
    const bool redundant = std::all_of(boundary.begin(), boundary.end(), [&](const Vec& b) {
      for (std::size_t i = 0; i < cover.centers.size(); ++i) {
        if (i != idx && (b - cover.centers[i]).norm() < 0.9 * patch_radius) return true;
      }
      return false;
    });
    if (redundant) cover.centers.erase(cover.centers.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  // Smallest uniform factor that still covers every sample.
  double needed = 0.0;
  for (const Vec& b : boundary) {
    double best = kInf;
    for (const Vec& c : cover.centers) best = std::min(best, (b - c).norm() / patch_radius);
    needed = std::max(needed, best);
  }
  const double lowest = std::min(1.0, 1.02 * needed);
  constexpr int kFactors = 24;
  double best_delta = -1.0;
  double best_factor = 1.0;
  for (int i = 0; i <= kFactors; ++i) {
    const double f = lowest + (1.0 - lowest) * i / kFactors;
    const std::vector<double> radii(cover.centers.size(), f * patch_radius);
    const double delta = measure_delta_with(domain, cover.centers, radii, eta, std::max<std::size_t>(samples / 4, 16));
    if (delta > best_delta || (delta == best_delta && f > best_factor)) {
      best_delta = delta;
      best_factor = f;
    }
  }
  cover.shrink = best_factor;
  cover.radii.assign(cover.centers.size(), best_factor * patch_radius);
  require(covers_boundary(domain, cover, boundary_count), ErrorKind::kCoverageFailure,
          "patch_cover: shrunken patches no longer cover the boundary");
  cover.delta = measure_delta(domain, cover, samples);
  // A lone patch has no competing boundary; any transition then costs a diameter.
  if (!std::isfinite(cover.delta)) cover.delta = 2.0 * domain.circumradius();
  require(cover.delta > 0.0, ErrorKind::kCoverageFailure,
          "patch_cover: patch boundaries meet inside the collar (delta = 0)");
  return cover;
}

PatchSchedule patch_schedule(const PatchCover& cover, double M) {
  require(cover.delta > 0.0 && std::isfinite(cover.delta), ErrorKind::kInvalidInput,
          "patch_schedule: delta must be positive");
  require(M >= 0.0 && std::isfinite(M), ErrorKind::kInvalidInput, "patch_schedule: M must be nonnegative");
  require(!cover.centers.empty(), ErrorKind::kInvalidInput, "patch_schedule: empty cover");
  // Smallest n with n * delta > M, guarded against rounding in M / delta.
  auto n = static_cast<long long>(std::floor(M / cover.delta)) + 1;
  while (n > 1 && static_cast<double>(n - 1) * cover.delta > M) --n;
  while (static_cast<double>(n) * cover.delta <= M) ++n;
  require(n <= 100000, ErrorKind::kResourceLimit, "patch_schedule: more than 1e5 rounds");
  PatchSchedule s;
  s.rounds = static_cast<int>(n);
  for (int r = 0; r < s.rounds; ++r) {
    for (std::size_t i = 0; i < cover.centers.size(); ++i) s.sequence.push_back(static_cast<int>(i));
  }
  return s;
}

// -------------------------------------------------------------- assembly

double max_depth_bound(const ConvexDomain& domain, const geom::Disc& disc) {
  Vec nearest;
  domain.boundary_distance(disc.center(), 1.0, &nearest);
  const Vec u = outward_normal(domain, nearest);
  return domain.support(u) + disc.support(-u);
}

namespace {

struct StepResult {
  std::vector<Component> components;
  double min_depth = kInf;
};

// One shell of tangent balls on the inner parallel surfaces of the boundary
// inside patch `i`, depths in the band (e_out, e_in).
std::optional<StepResult> build_step(const ConvexDomain& domain, const std::vector<Vec>& candidates,
                                     const Vec& x, double patch_radius, double validity, double r_curv,
                                     const std::vector<double>& depths, int m, double t, double c,
                                     double radius, int step, std::uint64_t seed) {
  const int d = domain.dim();
  const double e_in = depths.front();
  // Boundary points spread apart from their parallel-surface images by at most R / (R - e).
  const double r_sep = 2.0 * t * radius * r_curv / (r_curv - e_in);
  std::vector<Vec> local;
  for (const Vec& b : candidates) {
    const double dist = (b - x).norm();
    if (dist + radius + e_in < patch_radius && dist < validity) local.push_back(b);
  }
  if (local.empty()) return std::nullopt;
  const auto picked = sampling::farthest_point_traversal(local, 0, c * r_sep, local.size(), seed);
  std::vector<Vec> net;
  for (std::size_t q : picked) net.push_back(local[q]);
  const std::vector<int> color = nets::color_indices(net, r_sep);
  require(*std::max_element(color.begin(), color.end()) < m, ErrorKind::kIntegrity,
          "assemble_patch_labyrinth: patch net needs more than m classes");

  StepResult out;
  std::vector<int> per_class(m, 0);
  const int rim_count = d == 2 ? 2 : 64 * d;
  for (std::size_t q = 0; q < net.size(); ++q) {
    const int k = color[q] + 1;
    const Vec n = outward_normal(domain, net[q]);
    const Vec center = net[q] - depths[k] * n;
    Component comp{geom::FlatBall{center, n, radius, geom::LevelTag{step, k, per_class[k - 1]++}}, std::nullopt};
    const geom::Disc disc = comp.disc();
    for (const Vec& y : disc.rim_samples(rim_count)) {
      const double e = depth(domain, y);
      if (e <= depths[k + 1] || (y - x).norm() >= patch_radius) return std::nullopt;
      out.min_depth = std::min(out.min_depth, e);
    }
    out.components.push_back(std::move(comp));
  }
  // Same-sublevel tangent discs must not meet: certify with their own planes.
  for (std::size_t a = 0; a < out.components.size(); ++a) {
    for (std::size_t b = a + 1; b < out.components.size(); ++b) {
      const auto& A = out.components[a].ball;
      const auto& B = out.components[b].ball;
      if (A.level->k != B.level->k || (A.center - B.center).norm() > 2.0 * radius) continue;
      const geom::Disc da(A);
      const geom::Disc db(B);
      const double ha = A.normal.dot(A.center);
      const double hb = B.normal.dot(B.center);
      const bool apart = db.support(A.normal) < ha || da.support(B.normal) < hb ||
                         geom::disc_gap(da, db).lower > 0.0;
      if (!apart) return std::nullopt;
    }
  }
  return out;
}

}  // namespace

Labyrinth assemble_patch_labyrinth(const DomainDescriptor& descriptor, const PatchCover& cover, double M,
                                   const PatchParams& params) {
  const ConvexDomain domain = descriptor.body();
  const int d = domain.dim();
  require(cover.centers.size() == cover.radii.size() && !cover.centers.empty(), ErrorKind::kInvalidInput,
          "assemble_patch_labyrinth: malformed cover");
  require(cover.delta > 0.0 && cover.eta > 0.0, ErrorKind::kInvalidInput,
          "assemble_patch_labyrinth: cover needs positive delta and eta");
  require(params.t > 1.0 && params.c > 0.0 && params.c < 0.5 && params.t * params.c < 0.5,
          ErrorKind::kInvalidInput, "assemble_patch_labyrinth: need t > 1, 0 < c and t*c < 1/2");
  require(params.band_top > params.band_bottom && params.band_top < 1.0 && params.band_bottom > 0.0,
          ErrorKind::kInvalidInput, "assemble_patch_labyrinth: need 0 < band_bottom < band_top < 1");
  const PatchSchedule schedule = patch_schedule(cover, M);
  const int m = params.m > 0 ? params.m : shell::default_class_count(d, params.c);
  const auto steps = static_cast<double>(schedule.sequence.size());
  // Keep the collar above 10x the floor after the last step.
  const double q = std::clamp(std::pow(10.0 * params.collar_floor / cover.eta, 1.0 / steps), params.band_bottom,
                              0.5 * (1.0 + params.band_bottom) * params.band_top);

  const std::vector<Vec> candidates = domain.boundary_samples(d == 2 ? 1 << 15 : 200000);
  std::vector<OsculatingMap> charts;
  std::vector<double> curvature_radius;
  for (const Vec& x : cover.centers) {
    charts.push_back(osculating_map(domain, x, params.deviation_bound));
    double kmax = 0.0;
    for (const Vec& b : candidates) {
      if ((b - x).norm() < cover.radii[charts.size() - 1]) kmax = std::max(kmax, max_curvature(domain, b));
    }
    curvature_radius.push_back(1.0 / kmax);
  }

  Labyrinth lab;
  lab.dim = d;
  lab.domain = descriptor;
  lab.domain.outer = 1.0;
  lab.domain.inner = 1.0 - cover.eta / domain.inradius();
  lab.budget = M;
  lab.seed = params.seed;
  PatchRecord rec;
  rec.centers = cover.centers;
  rec.radii = cover.radii;
  rec.delta = cover.delta;
  rec.eta = cover.eta;
  rec.budget = M;
  rec.rounds = schedule.rounds;

  double eta = cover.eta;
  for (std::size_t s = 0; s < schedule.sequence.size(); ++s) {
    const int i = schedule.sequence[s];
    const int step = static_cast<int>(s) + 1;
    const double e_in = params.band_top * eta;
    const double e_out = q * eta;
    std::vector<double> depths(m + 2);
    for (int k = 0; k <= m + 1; ++k) depths[k] = e_in - k * (e_in - e_out) / (m + 1);
    const double r_curv = curvature_radius[i];
    require(r_curv > e_in, ErrorKind::kIntegrity, "assemble_patch_labyrinth: collar deeper than the curvature radius");
    // Sphere analogue r^2 < 2 R (e_k - e_{k+1}), shrunk until every check holds.
    double radius = 0.9 * std::sqrt(2.0 * (r_curv - e_in) * (e_in - e_out) / (m + 1));
    std::optional<StepResult> built;
    for (int attempt = 0; attempt < 24 && !built; ++attempt, radius *= 0.8) {
      built = build_step(domain, candidates, cover.centers[i], cover.radii[i], charts[i].validity_radius, r_curv,
                         depths, m, params.t, params.c, radius, step,
                         sampling::mix(params.seed, static_cast<std::uint64_t>(step)));
    }
    require(built.has_value() && !built->components.empty(), ErrorKind::kIntegrity,
            "assemble_patch_labyrinth: step " + std::to_string(step) + " placed no component");
    PatchStep ps;
    ps.patch = i;
    ps.eta = eta;
    ps.depths = depths;
    rec.steps.push_back(std::move(ps));
    for (auto& comp : built->components) lab.components.push_back(std::move(comp));
    const double next = std::min(eta, built->min_depth);
    require(next < eta, ErrorKind::kIntegrity, "assemble_patch_labyrinth: collar did not shrink");
    eta = next;
    require(eta >= params.collar_floor, ErrorKind::kCollarCollapse,
            "assemble_patch_labyrinth: collar width " + std::to_string(eta) + " fell below the floor after step " +
                std::to_string(step));
  }
  rec.final_eta = eta;
  lab.patches = std::move(rec);
  return lab;
}

}  // namespace lab::convex
