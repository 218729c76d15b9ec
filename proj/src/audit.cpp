#include "labyrinth/audit.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "labyrinth/ball_labyrinth.hpp"
#include "labyrinth/convex_adapter.hpp"
#include "labyrinth/error.hpp"
#include "labyrinth/kd_tree.hpp"
#include "labyrinth/sphere_nets.hpp"

namespace lab::audit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const Component& c, std::size_t index) {
  std::ostringstream out;
  out << "component " << index;
  if (c.ball.level) out << " (j=" << c.ball.level->j << ", k=" << c.ball.level->k << ", p=" << c.ball.level->p << ")";
  return out.str();
}

int rim_count(int d, int per_dim) { return d == 2 ? 2 : per_dim * d; }

// Interval of gauge values taken on a disc: the lower end is the gauge of its
// plane, the upper end the largest rim gauge (the gauge is convex).
struct GaugeRange {
  double lo = 0.0;
  double hi = 0.0;
};

GaugeRange gauge_range(const convex::ConvexDomain& body, const geom::Disc& disc, const std::vector<Vec>& rim) {
  GaugeRange g;
  for (const Vec& y : rim) g.hi = std::max(g.hi, body.gauge(y));
  const double h = disc.normal().dot(disc.center());
  const Vec n = h >= 0.0 ? Vec(disc.normal()) : Vec(-disc.normal());
  g.lo = std::abs(h) / body.support(n);
  return g;
}

Check check_components(const Labyrinth& lab) {
  Check c{"components", true, 0.0, kTol.unit_norm, ""};
  for (std::size_t i = 0; i < lab.components.size() && c.pass; ++i) {
    const auto& comp = lab.components[i];
    const auto& b = comp.ball;
    const double err = std::abs(b.normal.norm() - 1.0);
    c.measured = std::max(c.measured, err);
    bool ok = b.center.size() == lab.dim && b.normal.size() == lab.dim && b.center.allFinite() &&
              b.normal.allFinite() && std::isfinite(b.radius) && b.radius > 0.0 && err <= kTol.unit_norm;
    if (ok && comp.map) {
      ok = comp.map->rows() == lab.dim && comp.map->cols() == lab.dim && comp.map->allFinite() &&
           std::abs(comp.map->determinant()) > 1e-14;
    }
    if (!ok) {
      c.pass = false;
      c.detail = describe(comp, i) + ": bad radius, normal or map";
    }
  }
  return c;
}

// Maps world points to the coordinates in which the shell schedule lives.
struct UnitFrame {
  double scale = 1.0;
  std::optional<Mat> T;
  Vec operator()(const Vec& x) const { return T ? Vec(*T * x) : Vec(x / scale); }
};

Check check_tangent_schedule(const Labyrinth& lab, const std::vector<geom::Disc>& discs, const UnitFrame& frame,
                             int per_dim) {
  const ShellSchedule& sch = *lab.schedule;
  Check c{"tangent-non-intersection", true, -kInf, -1e-9, ""};
  for (std::size_t i = 0; i < discs.size(); ++i) {
    const auto& level = lab.components[i].ball.level;
    if (!level || level->j < 1 || level->j > sch.J || level->k < 1 || level->k > sch.m) {
      c.pass = false;
      c.detail = describe(lab.components[i], i) + ": level tag outside the schedule";
      return c;
    }
    const double next = sch.sublevel(level->j, level->k + 1);
    double rim = 0.0;
    for (const Vec& y : discs[i].rim_samples(rim_count(lab.dim, per_dim))) rim = std::max(rim, frame(y).norm());
    const double excess = rim - next;
    if (excess > c.measured) c.measured = excess;
    if (excess >= -1e-9 && c.pass) {
      c.pass = false;
      c.detail = describe(lab.components[i], i) + " reaches the next sublevel";
    }
  }
  return c;
}

std::vector<Check> check_nets(const Labyrinth& lab, std::size_t samples) {
  const ShellSchedule& sch = *lab.schedule;
  Check sep{"net-separation", true, kInf, 1.0, ""};
  Check cov{"net-covering", true, 0.0, 0.0, ""};
  Check cls{"class-bound", true, 0.0, nets::volumetric_class_bound(lab.dim, sch.c), ""};
  cls.measured = sch.m;
  if (sch.m > cls.threshold) {
    cls.pass = false;
    cls.detail = "m exceeds the volumetric bound";
  }
  const double slack = nets::covering_sample_slack(lab.dim, samples);
  double worst_ratio = 0.0;
  for (const NetRecord& net : lab.nets) {
    std::vector<std::vector<Vec>> classes(sch.m);
    std::vector<Vec> all;
    for (const auto& comp : lab.components) {
      if (!comp.ball.level || comp.ball.level->j != net.j) continue;
      classes[comp.ball.level->k - 1].push_back(comp.ball.normal);
      all.push_back(comp.ball.normal);
    }
    int nonempty = 0;
    for (const auto& pts : classes) {
      if (pts.empty()) continue;
      ++nonempty;
      if (pts.size() < 2) continue;
      const KdTree tree(pts);
      for (std::size_t a = 0; a < pts.size(); ++a) {
        const double ratio = tree.knn(pts[a], 2).back().first / net.r;
        sep.measured = std::min(sep.measured, ratio);
        if (ratio < 1.0 - 1e-12 && sep.pass) {
          sep.pass = false;
          sep.detail = "shell " + std::to_string(net.j) + " has a class pair closer than r";
        }
      }
    }
    if (nonempty > sch.m && cls.pass) {
      cls.pass = false;
      cls.detail = "shell " + std::to_string(net.j) + " uses more than m classes";
    }
    if (all.empty()) continue;
    const double radius = nets::covering_radius(all, lab.dim, samples, net.seed);
    const double bound = net.c * net.r + slack;
    if (radius / bound > worst_ratio) {
      worst_ratio = radius / bound;
      cov.measured = radius;
      cov.threshold = bound;
    }
    if (radius > bound && cov.pass) {
      cov.pass = false;
      cov.detail = "shell " + std::to_string(net.j) + " covering radius above c r + slack";
    }
  }
  if (!std::isfinite(sep.measured)) sep.measured = 0.0;  // no class with two points
  return {sep, cov, cls};
}

Check check_disjointness(const Labyrinth& lab, const std::vector<geom::Disc>& discs,
                         const std::vector<GaugeRange>& ranges, double inradius) {
  Check c{"disjointness", true, kInf, 0.0, "smallest certified gap among overlapping bounding spheres"};
  std::vector<Vec> centers;
  double max_radius = 0.0;
  for (const auto& d : discs) {
    centers.push_back(d.center());
    max_radius = std::max(max_radius, d.bounding_radius());
  }
  const KdTree tree(centers);
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i < discs.size(); ++i) {
    tree.radius_search(centers[i], discs[i].bounding_radius() + max_radius, near);
    for (std::size_t j : near) {
      if (j <= i) continue;
      if ((centers[i] - centers[j]).norm() > discs[i].bounding_radius() + discs[j].bounding_radius()) continue;
      // Separated by a level set of the gauge: a gauge step g costs g * inradius.
      double gap = std::max(ranges[j].lo - ranges[i].hi, ranges[i].lo - ranges[j].hi) * inradius;
      // Separated by the plane of either disc.
      for (const auto& [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
        const Vec& n = discs[a].normal();
        const double h = n.dot(discs[a].center());
        gap = std::max({gap, h - discs[b].support(n), -discs[b].support(-n) - h});
      }
      if (gap <= 0.0) gap = geom::disc_gap(discs[i], discs[j]).lower;
      c.measured = std::min(c.measured, gap);
      if (gap <= 0.0 && c.pass) {
        c.pass = false;
        c.detail = describe(lab.components[i], i) + " and " + describe(lab.components[j], j) + " not certified apart";
      }
    }
  }
  if (!std::isfinite(c.measured)) c.measured = 0.0;
  return c;
}

Check check_divergence(double s0, int horizon) {
  Check c{"schedule-divergence", true, kInf, 0.0, ""};
  const auto sums = shell::divergence_partial_sums(s0, horizon);
  for (int J = 1; J <= horizon; ++J) {
    const double bound = 0.4 * std::sqrt(1.0 - s0) * std::log(J + 1.0);
    const double ratio = sums[J - 1] / bound;
    c.measured = std::min(c.measured, ratio);
    if (ratio <= 1.0 && c.pass) {
      c.pass = false;
      c.detail = "partial sum below the bound at J = " + std::to_string(J);
    }
  }
  c.threshold = 1.0;
  return c;
}

std::vector<Check> check_patches(const Labyrinth& lab, const convex::ConvexDomain& body,
                                 const std::vector<geom::Disc>& discs, int per_dim) {
  const PatchRecord& rec = *lab.patches;
  Check nest{"collar-nesting", true, 0.0, 0.0, ""};
  Check collar{"collar-containment", true, -kInf, 0.0, ""};
  Check tangent{"tangent-non-intersection", true, -kInf, -1e-9, ""};
  Check inside{"patch-containment", true, 0.0, 1.0, ""};
  Check delta{"patch-delta", true, rec.delta, 0.0, ""};

  double prev = kInf;
  for (std::size_t s = 0; s < rec.steps.size(); ++s) {
    if (!(rec.steps[s].eta < prev)) {
      nest.pass = false;
      nest.detail = "collar width does not decrease at step " + std::to_string(s + 1);
    }
    prev = rec.steps[s].eta;
  }
  if (!(rec.final_eta < prev && rec.final_eta > 0.0)) {
    nest.pass = false;
    nest.detail = "final collar width is not below the last step's or not positive";
  }
  nest.measured = rec.final_eta;
  if (!(rec.delta > 0.0 && rec.rounds * rec.delta > rec.budget)) {
    delta.pass = false;
    delta.detail = "need delta > 0 and rounds * delta > M";
  }

  for (std::size_t i = 0; i < discs.size(); ++i) {
    const auto& level = lab.components[i].ball.level;
    if (!level || level->j < 1 || level->j > static_cast<int>(rec.steps.size())) {
      collar.pass = false;
      collar.detail = describe(lab.components[i], i) + ": no patch step";
      continue;
    }
    const PatchStep& step = rec.steps[level->j - 1];
    if (level->k < 1 || level->k + 1 >= static_cast<int>(step.depths.size())) {
      tangent.pass = false;
      tangent.detail = describe(lab.components[i], i) + ": sublevel outside the step";
      continue;
    }
    const Vec& x = rec.centers[step.patch];
    const double radius = rec.radii[step.patch];
    double min_depth = kInf;
    double reach = 0.0;
    for (const Vec& y : discs[i].rim_samples(rim_count(lab.dim, per_dim))) {
      const double dist = body.boundary_distance(y);
      min_depth = std::min(min_depth, body.value(y) < 0.0 ? dist : -dist);
      reach = std::max(reach, (y - x).norm() / radius);
    }
    const double top = convex::max_depth_bound(body, discs[i]);
    // Positive means outside the open collar of this step.
    const double excess = std::max(-min_depth, top - step.eta);
    collar.measured = std::max(collar.measured, excess);
    if (excess >= 0.0 && collar.pass) {
      collar.pass = false;
      collar.detail = describe(lab.components[i], i) + " leaves the open collar";
    }
    const double over = step.depths[level->k + 1] - min_depth;
    tangent.measured = std::max(tangent.measured, over);
    if (over >= -1e-9 && tangent.pass) {
      tangent.pass = false;
      tangent.detail = describe(lab.components[i], i) + " reaches the next sublevel surface";
    }
    inside.measured = std::max(inside.measured, reach);
    if (reach >= 1.0 && inside.pass) {
      inside.pass = false;
      inside.detail = describe(lab.components[i], i) + " leaves its patch";
    }
  }
  return {nest, collar, tangent, inside, delta};
}

// Spatial clusters of components with members sorted by lexicographic rank,
// for bounding sup_{earlier} w . x without touching every component.
class Clusters {
 public:
  Clusters(const std::vector<geom::Disc>& discs, const std::vector<std::size_t>& rank) : discs_(discs) {
    const int d = discs.empty() ? 0 : discs.front().dim();
    const std::size_t n = discs.size();
    if (n == 0) return;
    Vec lo = discs.front().center();
    Vec hi = lo;
    for (const auto& disc : discs) {
      lo = lo.cwiseMin(disc.center());
      hi = hi.cwiseMax(disc.center());
    }
    const double target = std::max(1.0, static_cast<double>(n) / 16.0);
    double volume = 1.0;
    const Vec span = (hi - lo).cwiseMax(1e-12);
    for (int a = 0; a < d; ++a) volume *= span(a);
    const double cell = std::pow(volume / target, 1.0 / d);
    std::vector<std::pair<std::vector<long>, std::size_t>> keyed;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<long> key(d);
      for (int a = 0; a < d; ++a) key[a] = static_cast<long>(std::floor((discs[i].center()(a) - lo(a)) / cell));
      keyed.push_back({std::move(key), i});
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t s = 0; s < keyed.size();) {
      Group g;
      std::size_t e = s;
      while (e < keyed.size() && keyed[e].first == keyed[s].first) g.members.push_back(keyed[e++].second);
      std::sort(g.members.begin(), g.members.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
      g.first_rank = rank[g.members.front()];
      g.center = Vec::Zero(d);
      for (std::size_t m : g.members) g.center += discs[m].center();
      g.center /= static_cast<double>(g.members.size());
      for (std::size_t m : g.members) {
        g.radius = std::max(g.radius, (discs[m].center() - g.center).norm() + discs[m].bounding_radius());
      }
      groups_.push_back(std::move(g));
      s = e;
    }
  }

  /// Bound on sup of w . x over components ranked before `limit`; nullopt as
  /// soon as some such component exceeds `threshold`. `violators` collects them.
  std::optional<double> earlier_support(const Vec& w, double threshold, std::size_t limit,
                                        const std::vector<std::size_t>& rank,
                                        std::vector<std::size_t>* violators = nullptr) const {
    double bound = -kInf;
    bool ok = true;
    for (const Group& g : groups_) {
      if (g.first_rank >= limit) continue;
      const double ub = w.dot(g.center) + g.radius;
      if (ub <= threshold) {
        bound = std::max(bound, ub);
        continue;
      }
      for (std::size_t m : g.members) {
        if (rank[m] >= limit) break;
        const double v = discs_[m].support(w);
        if (v > threshold) {
          ok = false;
          if (!violators) return std::nullopt;
          violators->push_back(m);
        }
        bound = std::max(bound, v);
      }
    }
    if (!ok) return std::nullopt;
    return bound;
  }

 private:
  struct Group {
    std::vector<std::size_t> members;
    std::size_t first_rank = 0;
    Vec center;
    double radius = 0.0;
  };
  const std::vector<geom::Disc>& discs_;
  std::vector<Group> groups_;
};

}  // namespace

const Check* AuditReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<std::size_t> lexicographic_order(const Labyrinth& lab) {
  std::vector<std::size_t> order(lab.components.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& la = lab.components[a].ball.level;
    const auto& lb = lab.components[b].ball.level;
    if (la && lb) return *la < *lb;
    return la.has_value() && !lb.has_value();
  });
  return order;
}

std::vector<std::optional<Witness>> lexicographic_witnesses(const Labyrinth& lab, double margin, bool lp_only,
                                                            int rim_samples_per_dim) {
  const std::size_t n = lab.components.size();
  std::vector<geom::Disc> discs;
  for (const auto& c : lab.components) discs.push_back(c.disc());
  const std::vector<std::size_t> order = lexicographic_order(lab);
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
  const Clusters clusters(discs, rank);
  const int samples = rim_count(lab.dim, rim_samples_per_dim);

  std::vector<std::optional<Witness>> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order[r];
    const geom::Disc& disc = discs[i];
    if (r == 0) {
      out[r] = Witness{r, geom::Hyperplane{disc.normal(), disc.normal().dot(disc.center())}, kInf, false};
      continue;
    }
    if (!lp_only) {
      // The component's own plane, either orientation.
      for (double sign : {1.0, -1.0}) {
        const Vec w = sign * disc.normal();
        const double level = w.dot(disc.center());
        const auto sup = clusters.earlier_support(w, level - 2.0 * margin, r, rank);
        if (!sup) continue;
        out[r] = Witness{r, geom::Hyperplane{w, 0.5 * (level + *sup)}, 0.5 * (level - *sup), false};
        break;
      }
      if (out[r]) continue;
    }
    // Margin-maximizing LP on rim samples, re-checked against every earlier
    // component exactly; violators join the sample set.
    const std::vector<Vec> first = disc.rim_samples(samples);
    std::vector<Vec> second;
    std::vector<char> used(n, 0);
    auto add = [&](std::size_t m) {
      if (used[m]) return;
      used[m] = 1;
      for (const Vec& y : discs[m].rim_samples(samples)) second.push_back(y);
    };
    for (std::size_t q = 0; q < r; ++q) {
      const std::size_t m = order[q];
      if ((discs[m].center() - disc.center()).norm() <= 4.0 * (disc.bounding_radius() + discs[m].bounding_radius())) {
        add(m);
      }
    }
    if (second.empty()) add(order[r - 1]);
    for (int round = 0; round < 16; ++round) {
      const auto plane = geom::separating_hyperplane(first, second, margin);
      if (!plane) break;
      // Exact margins on the continuous discs.
      const double low = -disc.support(-plane->normal) - plane->offset;
      std::vector<std::size_t> violators;
      const auto sup = clusters.earlier_support(plane->normal, plane->offset - margin, r, rank, &violators);
      if (sup && low >= margin) {
        out[r] = Witness{r, *plane, std::min(low, plane->offset - *sup), true};
        break;
      }
      if (violators.empty()) break;
      for (std::size_t m : violators) add(m);
    }
  }
  return out;
}

AuditReport audit_labyrinth(const Labyrinth& lab, const AuditOptions& options) {
  AuditReport report;
  report.empty = lab.components.empty();
  report.checks.push_back(check_components(lab));
  if (!report.checks.back().pass) {
    report.pass = false;
    return report;
  }
  const convex::ConvexDomain body = lab.domain.body();
  const int per_dim = options.rim_samples_per_dim;
  std::vector<geom::Disc> discs;
  for (const auto& c : lab.components) discs.push_back(c.disc());

  // Containment in the open shell inner < gauge < outer.
  std::vector<GaugeRange> ranges;
  Check contain{"containment", true, 0.0, 0.0, ""};
  double worst = -kInf;
  for (std::size_t i = 0; i < discs.size(); ++i) {
    const GaugeRange g = gauge_range(body, discs[i], discs[i].rim_samples(rim_count(lab.dim, per_dim)));
    ranges.push_back(g);
    const double excess = std::max(g.hi - lab.domain.outer, lab.domain.inner - g.lo);
    worst = std::max(worst, excess);
    if (excess >= 0.0 && contain.pass) {
      contain.pass = false;
      contain.detail = describe(lab.components[i], i) + " leaves the open shell";
    }
  }
  contain.measured = report.empty ? 0.0 : worst;
  report.checks.push_back(contain);

  if (lab.schedule) {
    UnitFrame frame;
    if (lab.domain.type == DomainType::kEllipsoid) {
      frame.T = convex::normalize_ellipsoid(lab.domain.shape).T;
    } else {
      frame.scale = lab.schedule->scale;
    }
    report.checks.push_back(check_tangent_schedule(lab, discs, frame, per_dim));
    if (!lab.nets.empty()) {
      for (auto& c : check_nets(lab, options.covering_samples)) report.checks.push_back(std::move(c));
    }
    report.checks.push_back(check_divergence(lab.schedule->s0, options.divergence_horizon));
  }
  if (lab.patches) {
    for (auto& c : check_patches(lab, body, discs, per_dim)) report.checks.push_back(std::move(c));
  }

  report.checks.push_back(check_disjointness(lab, discs, ranges, body.inradius()));

  if (options.separation) {
    Check sep{"lexicographic-separation", true, kInf, options.separation_margin, ""};
    const auto witnesses =
        lexicographic_witnesses(lab, options.separation_margin, options.lp_only, options.rim_samples_per_dim);
    const auto order = lexicographic_order(lab);
    std::size_t from_lp = 0;
    for (std::size_t r = 0; r < witnesses.size(); ++r) {
      if (!witnesses[r]) {
        if (sep.pass) {
          sep.pass = false;
          sep.detail = describe(lab.components[order[r]], order[r]) + ": no witness at margin " +
                       std::to_string(options.separation_margin);
        }
        continue;
      }
      if (r > 0) sep.measured = std::min(sep.measured, witnesses[r]->margin);
      from_lp += witnesses[r]->from_lp ? 1 : 0;
    }
    if (!std::isfinite(sep.measured)) sep.measured = 0.0;
    if (sep.pass) sep.detail = std::to_string(from_lp) + " of " + std::to_string(witnesses.size()) + " witnesses from the LP";
    report.checks.push_back(sep);
  }

  for (const auto& c : report.checks) report.pass = report.pass && c.pass;
  return report;
}

}  // namespace lab::audit
