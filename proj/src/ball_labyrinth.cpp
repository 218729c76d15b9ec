#include "labyrinth/ball_labyrinth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "labyrinth/error.hpp"
#include "labyrinth/kd_tree.hpp"
#include "labyrinth/sampling.hpp"

namespace lab::shell {

namespace {

void check_parameters(double s0, int m, double t, double c) {
  require(s0 > 0.0 && s0 < 1.0, ErrorKind::kInvalidInput, "schedule: need 0 < s0 < 1");
  require(m >= 1, ErrorKind::kInvalidInput, "schedule: need m >= 1");
  require(t > 1.0, ErrorKind::kInvalidInput, "schedule: need t > 1");
  require(c > 0.0 && c < 0.5, ErrorKind::kInvalidInput, "schedule: need 0 < c < 1/2");
  require(t * c < 0.5, ErrorKind::kInvalidInput,
          "schedule: need t*c < 1/2 (got t*c = " + std::to_string(t * c) + ")");
}

// Same-sphere tangent discs of radius r at angle theta are disjoint iff
// r < s tan(theta/2); discs of different sublevels live in disjoint shells.
void validate_shell(const Shell& shell, const ShellSchedule& sch, int j) {
  const double r = sch.scale * sch.tangent_radius(j);
  for (int k = 1; k <= sch.m; ++k) {
    std::vector<Vec> normals;
    for (const auto& b : shell.balls) {
      if (b.level->k == k) normals.push_back(b.normal);
    }
    if (normals.size() < 2) continue;
    const double s = sch.scale * sch.sublevel(j, k);
    const KdTree tree(normals);
    std::vector<std::size_t> near;
    for (std::size_t i = 0; i < normals.size(); ++i) {
      tree.radius_search(normals[i], std::min(2.0, 4.0 * r / s), near);
      for (std::size_t q : near) {
        if (q <= i) continue;
        const double chord = (normals[i] - normals[q]).norm();
        const double half = std::asin(std::min(1.0, chord / 2.0));
        require(half < std::numbers::pi / 2 && r < s * std::tan(half), ErrorKind::kIntegrity,
                "build_labyrinth: intersecting tangent balls in shell " + std::to_string(j));
      }
    }
  }
  for (const auto& b : shell.balls) {
    const int k = b.level->k;
    const double rim = std::sqrt(b.center.squaredNorm() + b.radius * b.radius);
    require(rim < sch.scale * sch.sublevel(j, k + 1), ErrorKind::kIntegrity,
            "build_labyrinth: tangent ball reaches the next sublevel in shell " + std::to_string(j));
  }
}

}  // namespace

double compute_tangent_radius_constant(const ShellSchedule& sch) {
  double best = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= sch.J; ++j) {
    for (int k = 1; k <= sch.m; ++k) {
      const double lo = sch.sublevel(j, k);
      const double hi = k == sch.m ? sch.s[j] : sch.sublevel(j, k + 1);
      require(hi > lo, ErrorKind::kDegenerateSchedule,
              "tangent radius constant: s_{j,k+1} <= s_{j,k} at j = " + std::to_string(j));
      best = std::min(best, std::sqrt((hi * hi - lo * lo) / sch.delta(j)));
    }
  }
  require(std::isfinite(best), ErrorKind::kDegenerateSchedule, "tangent radius constant: no shells");
  return 0.9 * best;
}

ShellSchedule make_schedule(double s0, int J, int m, double t, double c) {
  check_parameters(s0, m, t, c);
  require(J >= 1, ErrorKind::kInvalidInput, "schedule: need J >= 1");
  ShellSchedule sch;
  sch.s0 = s0;
  sch.J = J;
  sch.m = m;
  sch.t = t;
  sch.c = c;
  sch.s.resize(J + 1);
  sch.s[0] = s0;
  for (int j = 1; j <= J; ++j) sch.s[j] = 1.0 - (1.0 - s0) / (j + 1);
  sch.a = compute_tangent_radius_constant(sch);
  for (int j = 1; j <= J; ++j) {
    const double r = sch.tangent_radius(j);
    for (int k = 1; k <= m; ++k) {
      const double lo = sch.sublevel(j, k);
      const double hi = k == m ? sch.s[j] : sch.sublevel(j, k + 1);
      require(lo * lo + r * r < hi * hi, ErrorKind::kDegenerateSchedule,
              "schedule: tangent ball reaches the next sublevel");
    }
  }
  return sch;
}

int default_class_count(int d, double c) { return nets::class_capacity(d, c, 1.0); }

std::uint64_t shell_seed(std::uint64_t seed, int j) {
  return sampling::mix(seed, static_cast<std::uint64_t>(j));
}

Shell build_shell(const ShellSchedule& sch, int dim, int j, std::uint64_t seed) {
  require(j >= 1 && j <= sch.J, ErrorKind::kInvalidInput, "build_shell: shell index out of range");
  const double r_net = sch.net_separation(j);
  const nets::SeparatedNet net = nets::build_separated_families(dim, r_net, sch.c, shell_seed(seed, j));
  Shell shell;
  shell.net.j = j;
  shell.net.r = r_net;
  shell.net.c = sch.c;
  shell.net.m = sch.m;
  shell.net.seed = shell_seed(seed, j);
  for (std::size_t k = 0; k < net.classes.size(); ++k) {
    if (net.classes[k].empty()) continue;
    require(static_cast<int>(k) < sch.m, ErrorKind::kInvalidInput,
            "build_shell: m = " + std::to_string(sch.m) + " is below the number of net classes (" +
                std::to_string(net.m) + " needed for d = " + std::to_string(dim) + ")");
  }
  const double radius = sch.scale * sch.tangent_radius(j);
  for (int k = 1; k <= sch.m; ++k) {
    const auto idx = static_cast<std::size_t>(k - 1);
    const std::vector<Vec> empty;
    const auto& cls = idx < net.classes.size() ? net.classes[idx] : empty;
    shell.net.class_sizes.push_back(static_cast<int>(cls.size()));
    const double s = sch.scale * sch.sublevel(j, k);
    for (std::size_t p = 0; p < cls.size(); ++p) {
      shell.balls.push_back(geom::FlatBall{s * cls[p], cls[p], radius,
                                           geom::LevelTag{j, k, static_cast<int>(p)}});
    }
  }
  return shell;
}

Labyrinth build_labyrinth(const ShellSchedule& sch, int dim, std::uint64_t seed) {
  require(dim >= 2 && dim <= kMaxDim, ErrorKind::kInvalidInput, "build_labyrinth: dimension out of range");
  require(sch.scale > 0.0 && sch.scale <= 1.0, ErrorKind::kInvalidInput, "build_labyrinth: scale must lie in (0, 1]");
  Labyrinth lab;
  lab.dim = dim;
  lab.domain.type = sch.scale == 1.0 ? DomainType::kBall : DomainType::kAnnulus;
  lab.domain.dim = dim;
  lab.domain.inner = sch.scale * sch.s0;
  lab.domain.outer = sch.scale;
  lab.schedule = sch;
  lab.seed = seed;
  for (int j = 1; j <= sch.J; ++j) {
    Shell shell = build_shell(sch, dim, j, seed);
    validate_shell(shell, sch, j);
    for (auto& b : shell.balls) lab.components.push_back(Component{std::move(b), std::nullopt});
    lab.nets.push_back(std::move(shell.net));
  }
  return lab;
}

Truncation truncate(const Labyrinth& lab, int j_lo, int j_hi) {
  require(lab.schedule.has_value(), ErrorKind::kInvalidInput, "truncate: labyrinth has no shell schedule");
  const ShellSchedule& sch = *lab.schedule;
  require(1 <= j_lo && j_lo <= j_hi && j_hi <= sch.J, ErrorKind::kInvalidInput,
          "truncate: need 1 <= J_lo <= J_hi <= J");
  Truncation out;
  out.labyrinth = lab;
  out.labyrinth.components.clear();
  out.labyrinth.nets.clear();
  for (const auto& c : lab.components) {
    const int j = c.ball.level ? c.ball.level->j : 0;
    if (j >= j_lo && j <= j_hi) out.labyrinth.components.push_back(c);
  }
  for (const auto& n : lab.nets) {
    if (n.j >= j_lo && n.j <= j_hi) out.labyrinth.nets.push_back(n);
  }
  out.inner_clearance = sch.scale * sch.s[j_lo - 1];
  return out;
}

std::vector<ExhaustionLayer> exhaustion_labyrinth(const ExhaustionPlan& plan, const ExhaustionParams& params) {
  require(plan.rho.size() >= 2, ErrorKind::kInvalidInput, "exhaustion: need at least two radii");
  require(plan.budgets.size() == plan.rho.size() - 1, ErrorKind::kInvalidInput,
          "exhaustion: need one budget per annulus");
  for (std::size_t i = 0; i < plan.rho.size(); ++i) {
    require(plan.rho[i] > 0.0 && plan.rho[i] < 1.0, ErrorKind::kInvalidInput,
            "exhaustion: radii must lie in (0, 1)");
    if (i > 0) {
      require(plan.rho[i] > plan.rho[i - 1], ErrorKind::kInvalidInput,
              "exhaustion: radii must be strictly increasing");
    }
  }
  for (double M : plan.budgets) {
    require(M >= 0.0 && std::isfinite(M), ErrorKind::kInvalidInput, "exhaustion: budgets must be >= 0");
  }
  require(params.shell_cap >= 1, ErrorKind::kInvalidInput, "exhaustion: shell cap must be >= 1");
  const int m = default_class_count(params.dim, params.c);

  std::vector<ExhaustionLayer> layers;
  for (std::size_t n = 0; n + 1 < plan.rho.size(); ++n) {
    const double inner = plan.rho[n];
    const double outer = plan.rho[n + 1];
    const double M = plan.budgets[n];
    const std::uint64_t seed = sampling::mix(params.seed, n);
    double best_overall = 0.0;

    auto attempt = [&](int J) {
      ShellSchedule sch = make_schedule(inner / outer, J, m, params.t, params.c);
      sch.scale = outer;
      ExhaustionLayer layer;
      layer.labyrinth = build_labyrinth(sch, params.dim, seed);
      layer.labyrinth.budget = M;
      layer.shells = J;
      const auto report = escape::min_escape_length(layer.labyrinth, params.effort);
      layer.best = report.best ? report.best->length : std::numeric_limits<double>::infinity();
      best_overall = std::max(best_overall, layer.best);
      return layer;
    };
    auto passes = [&](const ExhaustionLayer& l) { return l.best > (1.0 + params.margin) * M; };

    // Doubling, then bisection between the last failing and first passing J.
    int lo = 0;
    int J = 1;
    ExhaustionLayer found = attempt(J);
    while (!passes(found)) {
      lo = J;
      require(J < params.shell_cap, ErrorKind::kBudgetExhausted,
              "exhaustion: shell cap " + std::to_string(params.shell_cap) + " reached for annulus (" +
                  std::to_string(inner) + ", " + std::to_string(outer) + ") with best crossing " +
                  std::to_string(best_overall) + " <= M = " + std::to_string(M));
      J = std::min(2 * J, params.shell_cap);
      found = attempt(J);
    }
    int hi = J;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      ExhaustionLayer trial = attempt(mid);
      if (passes(trial)) {
        hi = mid;
        found = std::move(trial);
      } else {
        lo = mid;
      }
    }
    layers.push_back(std::move(found));
  }
  return layers;
}

std::vector<double> divergence_partial_sums(double s0, int max_J) {
  require(s0 > 0.0 && s0 < 1.0 && max_J >= 1, ErrorKind::kInvalidInput, "divergence: bad arguments");
  std::vector<double> sums(max_J);
  double total = 0.0;
  double prev = s0;
  for (int j = 1; j <= max_J; ++j) {
    const double s = 1.0 - (1.0 - s0) / (j + 1);
    total += std::sqrt(s - prev);
    sums[j - 1] = total;
    prev = s;
  }
  return sums;
}

}  // namespace lab::shell
