// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "labyrinth/audit.hpp"
#include "labyrinth/ball_labyrinth.hpp"
#include "labyrinth/cli.hpp"
#include "labyrinth/convex_adapter.hpp"
#include "labyrinth/escape.hpp"
#include "labyrinth/io.hpp"
#include "labyrinth/sphere_nets.hpp"
#include "support/grid_oracle.hpp"
#include "support/helpers.hpp"

using namespace lab;
using testing::vec;

namespace {

// Pinned tolerances and limits.
constexpr double kNetC = 0.45;
constexpr std::size_t kCoverSamples = 100000;
constexpr double kRimGap = 1e-9;
constexpr double kWitnessMargin = 1e-6;
constexpr double kCalibrationTol = 0.02;
constexpr double kTipDetour = 1.07703;
constexpr double kGridStep = 1.0 / 512.0;
constexpr std::size_t kHeadlineNodes = 80000;
constexpr double kDivergenceFactor = 0.4;
constexpr int kDivergenceHorizon = 10000;
constexpr double kDeltaStability = 0.10;
constexpr double kPatchRadius = 1.0;
constexpr double kPatchEta = 0.05;
constexpr double kPatchBudget = 1.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double brute_min_distance(const std::vector<Vec>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = i + 1; k < points.size(); ++k) best = std::min(best, (points[i] - points[k]).norm());
  }
  return best;
}

Outcome criterion_nets() {
  Outcome out;
  double worst_sep = std::numeric_limits<double>::infinity();
  double worst_cover = 0.0;
  for (int d : {2, 3}) {
    std::vector<int> ms;
    const double bound = nets::volumetric_class_bound(d, kNetC);
    const double slack = nets::covering_sample_slack(d, kCoverSamples);
    for (double r : {0.1, 0.2, 0.4}) {
      const auto net = nets::build_separated_families(d, r, kNetC, 1);
      ms.push_back(net.m);
      for (const auto& cls : net.classes) {
        const double sep = brute_min_distance(cls);
        if (cls.size() > 1) worst_sep = std::min(worst_sep, sep / r);
        out.require(sep >= r, fmt("d=%d r=%g class separation %.6g < r", d, r, sep));
      }
      const double cover = nets::covering_radius(net.points(), d, kCoverSamples, 12345);
      worst_cover = std::max(worst_cover, cover / (kNetC * r));
      out.require(cover <= kNetC * r + slack, fmt("d=%d r=%g covering %.6g > %.6g", d, r, cover, kNetC * r + slack));
      out.require(net.m <= bound, fmt("d=%d m=%d above %g", d, net.m, bound));
    }
    out.require(ms[0] == ms[1] && ms[1] == ms[2], fmt("d=%d m varies: %d %d %d", d, ms[0], ms[1], ms[2]));
    out.detail += fmt("%sd=%d m=%d (bound %.0f)", out.detail.empty() ? "" : ", ", d, ms[0], bound);
  }
  out.detail += fmt(", min sep/r %.4f, max cover/(c r) %.4f", worst_sep, worst_cover);
  return out;
}

Outcome criterion_shells() {
  Outcome out;
  const auto sch = shell::make_schedule(0.5, 3, shell::default_class_count(2, kNetC), 1.05, kNetC);
  const auto lab = shell::build_labyrinth(sch, 2, 1);
  const auto segs = testing::segments_of(lab);

  double worst_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lab.components.size(); ++i) {
    const auto& b = lab.components[i].ball;
    out.require(b.level.has_value(), fmt("component %zu untagged", i));
    if (!b.level) continue;
    const double rim = std::max(oracle::norm(segs[i][0]), oracle::norm(segs[i][1]));
    const double next = sch.scale * sch.sublevel(b.level->j, b.level->k + 1);
    worst_gap = std::min(worst_gap, next - rim);
    out.require(rim < next - kRimGap, fmt("component %zu rim %.12g reaches %.12g", i, rim, next));
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t k = i + 1; k < segs.size(); ++k) {
      out.require(!oracle::segments_touch(segs[i][0], segs[i][1], segs[k][0], segs[k][1]),
                  fmt("components %zu and %zu meet", i, k));
    }
  }

  // Witnesses come from the LP alone; each plane is re-checked on segment
  // endpoints, which is exact for a linear functional on a segment.
  const auto order = audit::lexicographic_order(lab);
  const auto witnesses = audit::lexicographic_witnesses(lab, kWitnessMargin, true, 64);
  double worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!witnesses[rank]) {
      out.require(false, fmt("no witness at rank %zu", rank));
      continue;
    }
    if (rank == 0) continue;  // nothing earlier to separate from
    const auto& plane = witnesses[rank]->plane;
    out.require(witnesses[rank]->from_lp, fmt("rank %zu witness not from the LP", rank));
    auto value = [&](const oracle::P& p) { return plane.evaluate(vec({p.x, p.y})); };
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& p : segs[order[rank]]) margin = std::min(margin, value(p));
    for (std::size_t e = 0; e < rank; ++e) {
      for (const auto& p : segs[order[e]]) margin = std::min(margin, -value(p));
    }
    worst_margin = std::min(worst_margin, margin);
    out.require(margin >= kWitnessMargin, fmt("rank %zu margin %.3g", rank, margin));
  }
  out.detail = fmt("%zu components, min rim gap %.3g, min LP margin %.3g", lab.components.size(), worst_gap,
                   worst_margin) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome criterion_calibration() {
  Outcome out;
  const escape::Effort effort{{1, 2}, {20000}, 400, 0.0};

  Labyrinth empty;
  empty.domain.type = DomainType::kAnnulus;
  empty.domain.inner = 0.5;
  empty.domain.outer = 1.0;
  const auto annulus = escape::min_escape_length(empty, effort);
  const double a = annulus.best ? annulus.best->length : std::numeric_limits<double>::infinity();
  out.require(std::abs(a - 0.5) <= kCalibrationTol * 0.5, fmt("annulus %.6g", a));

  const auto fb = geom::make_flat_ball(vec({0.5, 0}), vec({1, 0}), 0.2);
  const escape::EscapeProblem problem{escape::Region::box(vec({-0.25, -0.75}), vec({1.25, 0.75})),
                                      escape::Terminal::at(vec({0, 0})), escape::Terminal::at(vec({1, 0})),
                                      escape::Obstacles({geom::Disc(fb)}, 2)};
  const auto single = escape::min_escape_length(problem, effort);
  const double s = single.best ? single.best->length : std::numeric_limits<double>::infinity();
  const auto grid = oracle::grid_shortest_path({{oracle::P{0.5, -0.2}, oracle::P{0.5, 0.2}}},
                                               {{-0.25, -0.75}, {1.25, 0.75}, kGridStep}, {0, 0}, {1, 0});
  const double g = grid.value_or(std::numeric_limits<double>::infinity());
  out.require(std::abs(s - kTipDetour) <= kCalibrationTol * kTipDetour, fmt("single obstacle %.6g", s));
  out.require(std::abs(g - kTipDetour) <= kCalibrationTol * kTipDetour, fmt("grid oracle %.6g", g));
  out.require(std::abs(s - g) <= kCalibrationTol * g, fmt("verifier %.6g vs grid %.6g", s, g));
  out.detail = fmt("annulus %.6f, single obstacle %.6f, grid oracle %.6f", a, s, g) +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome criterion_headline() {
  Outcome out;
  const shell::ExhaustionPlan plan{{0.5, 0.75, 0.875}, {1.0, 1.0}};
  shell::ExhaustionParams params;
  std::vector<shell::ExhaustionLayer> layers;
  try {
    layers = shell::exhaustion_labyrinth(plan, params);
  } catch (const std::exception& e) {
    out.require(false, std::string("exhaustion: ") + e.what());
    return out;
  }
  out.require(layers.size() == plan.budgets.size(), "wrong layer count");
  const escape::Effort effort{{1, 2, 3, 4}, {kHeadlineNodes}, 400, 0.0};
  for (std::size_t n = 0; n < layers.size(); ++n) {
    const auto& layer = layers[n];
    out.require(layer.shells <= params.shell_cap, fmt("layer %zu over the shell cap", n + 1));
    const auto report = escape::min_escape_length(layer.labyrinth, effort);
    const double best = report.best ? report.best->length : std::numeric_limits<double>::infinity();
    out.require(best > plan.budgets[n], fmt("layer %zu crossing %.6g <= M", n + 1, best));
    if (report.best) {
      const auto problem = escape::escape_problem(layer.labyrinth);
      out.require(escape::certify(*report.best, problem.obstacles, problem.source, problem.target),
                  fmt("layer %zu best path not certified", n + 1));
    }
    const auto audit = audit::audit_labyrinth(layer.labyrinth);
    out.require(audit.pass, fmt("layer %zu audit fails", n + 1));
    out.detail += fmt("%slayer %zu: J=%d, %zu components, best crossing %.4f > M=%.2f",
                      n == 0 ? "" : ", ", n + 1, layer.shells, layer.labyrinth.components.size(), best,
                      plan.budgets[n]);
  }
  return out;
}

Outcome criterion_divergence() {
  Outcome out;
  const double s0 = 0.5;
  const auto sums = shell::divergence_partial_sums(s0, kDivergenceHorizon);
  out.require(static_cast<int>(sums.size()) == kDivergenceHorizon, "wrong length");
  double independent = 0.0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (int J = 1; J <= static_cast<int>(sums.size()); ++J) {
    const double sj = 1.0 - (1.0 - s0) / (J + 1);
    const double sprev = 1.0 - (1.0 - s0) / J;
    independent += std::sqrt(sj - sprev);
    const double floor = kDivergenceFactor * std::sqrt(1.0 - s0) * std::log(J + 1.0);
    worst_ratio = std::min(worst_ratio, sums[J - 1] / floor);
    out.require(sums[J - 1] > floor, fmt("J=%d sum %.6g <= %.6g", J, sums[J - 1], floor));
    out.require(std::abs(sums[J - 1] - independent) <= 1e-9 * independent, fmt("J=%d sum mismatch", J));
  }
  out.detail = fmt("sum at J=%d is %.4f, min ratio to the log bound %.4f", kDivergenceHorizon, sums.back(),
                   worst_ratio) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome criterion_ellipse() {
  Outcome out;
  DomainDescriptor desc;
  desc.type = DomainType::kPreset;
  desc.dim = 2;
  desc.preset = "ellipse";
  const auto body = desc.body();
  const auto cover = convex::patch_cover(body, kPatchRadius, kPatchEta);
  const double dense = convex::measure_delta(body, cover, 10 * cover.samples);
  const double drift = std::abs(dense - cover.delta) / cover.delta;
  out.require(cover.delta > 0.0, "delta not positive");
  out.require(drift <= kDeltaStability, fmt("delta %.6g vs %.6g at 10x", cover.delta, dense));
  out.require(convex::covers_boundary(body, cover, 20000), "patches miss the boundary");

  const int n = static_cast<int>(std::floor(kPatchBudget / cover.delta)) + 1;
  const auto schedule = convex::patch_schedule(cover, kPatchBudget);
  out.require(schedule.rounds == n, fmt("rounds %d, expected %d", schedule.rounds, n));
  out.require(schedule.sequence.size() == static_cast<std::size_t>(n) * cover.centers.size(), "sequence length");

  const auto lab = convex::assemble_patch_labyrinth(desc, cover, kPatchBudget);
  out.require(lab.patches.has_value(), "no patch record");
  if (lab.patches) {
    const auto& steps = lab.patches->steps;
    out.require(steps.size() == schedule.sequence.size(), "step count");
    for (std::size_t j = 1; j < steps.size(); ++j) {
      out.require(steps[j].eta < steps[j - 1].eta, fmt("eta not decreasing at step %zu", j + 1));
    }
    out.require(lab.patches->final_eta < steps.back().eta, "final eta not below the last step");
  }
  const auto report = audit::audit_labyrinth(lab);
  for (const auto& c : report.checks) out.require(c.pass, "audit " + c.name + ": " + c.detail);
  out.detail = fmt("%zu patches, delta %.5f (10x: %.5f, drift %.2f%%), n=%d, %zu steps, %zu components",
                   cover.centers.size(), cover.delta, dense, 100 * drift, n, schedule.sequence.size(),
                   lab.components.size()) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome criterion_determinism() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "labyrinth_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> configs = {
      {"generate", "--dim", "2", "--s0", "0.5", "--J", "3", "--seed", "7"},
      {"generate", "--dim", "3", "--J", "1", "--seed", "7"},
      {"generate", "--domain", "preset", "--preset", "ellipse", "--M", "1"},
  };
  std::size_t files = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::vector<std::string> names;
    for (const char* run : {"a", "b"}) {
      auto args = configs[i];
      const std::string out_file = (dir / fmt("cfg%zu_%s.json", i, run)).string();
      args.insert(args.end(), {"--out", out_file});
      std::ostringstream sink, err;
      const int code = cli::run(args, sink, err);
      out.require(code == cli::kExitPass, fmt("config %zu exit %d: %s", i, code, err.str().c_str()));
    }
    for (const char* suffix : {".json", ".audit.json"}) {
      const auto a = dir / fmt("cfg%zu_a%s", i, suffix);
      const auto b = dir / fmt("cfg%zu_b%s", i, suffix);
      if (!fs::exists(a) || !fs::exists(b)) {
        out.require(false, fmt("config %zu missing %s", i, suffix));
        continue;
      }
      out.require(io::read_file(a.string()) == io::read_file(b.string()),
                  fmt("config %zu %s differs", i, suffix));
      ++files;
    }
  }
  fs::remove_all(dir);
  out.detail = fmt("%zu file pairs byte-identical across %zu configs", files, configs.size()) +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "separated nets", 30, criterion_nets},
      {2, "shell construction", 120, criterion_shells},
      {3, "verifier calibration", 60, criterion_calibration},
      {4, "exhaustion headline", 600, criterion_headline},
      {5, "divergence", 1, criterion_divergence},
      {6, "ellipse patch schedule", 300, criterion_ellipse},
      {7, "determinism", 600, criterion_determinism},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.require(false, std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.require(seconds < c.limit_seconds, fmt("took %.1f s, limit %.0f s", seconds, c.limit_seconds));
    all = all && outcome.pass;
    std::printf("criterion %d [%s]: %s (%.2f s) %s\n", c.id, c.name, outcome.pass ? "PASS" : "FAIL", seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
