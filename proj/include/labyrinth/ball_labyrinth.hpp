#pragma once

#include <cstdint>
#include <vector>

#include "labyrinth/escape.hpp"
#include "labyrinth/labyrinth.hpp"
#include "labyrinth/sphere_nets.hpp"

namespace lab::shell {

/// s_j = 1 - (1 - s0)/(j + 1), sublevels, and the tangent-radius constant a.
ShellSchedule make_schedule(double s0, int J, int m, double t, double c);

/// a = 0.9 min_{j,k} sqrt((s_{j,k+1}^2 - s_{j,k}^2) / (s_j - s_{j-1})), s_{j,m+1} = s_j.
double compute_tangent_radius_constant(const ShellSchedule& schedule);

/// Default number of sublevels for (d, c): the class capacity of the nets.
int default_class_count(int d, double c);

struct Shell {
  std::vector<geom::FlatBall> balls;
  NetRecord net;
};

/// Seed of the net of shell j.
std::uint64_t shell_seed(std::uint64_t seed, int j);

/// Tangent balls of shell j: class k of the net sits on the sphere of radius
/// s_{j,k}, each point p giving the ball centered at s_{j,k} p with normal p.
Shell build_shell(const ShellSchedule& schedule, int dim, int j, std::uint64_t seed);

/// All shells in lexicographic order, inside the ball of radius schedule.scale.
Labyrinth build_labyrinth(const ShellSchedule& schedule, int dim, std::uint64_t seed);

struct Truncation {
  Labyrinth labyrinth;
  double inner_clearance = 0.0;  // every kept component lies outside this radius
};

Truncation truncate(const Labyrinth& lab, int j_lo, int j_hi);

struct ExhaustionPlan {
  std::vector<double> rho;      // rho_1 < rho_2 < ... < 1
  std::vector<double> budgets;  // M_n for the annulus (rho_n, rho_{n+1})
};

struct ExhaustionParams {
  int dim = 2;
  double t = 1.05;
  double c = 0.05;
  int shell_cap = 64;
  double margin = 0.05;  // the loop stops at best > (1 + margin) M
  std::uint64_t seed = 1;
  // In-loop search only; callers re-verify the result at full effort.
  escape::Effort effort{{1}, {20000}, 400, 0.0};
};

struct ExhaustionLayer {
  Labyrinth labyrinth;
  int shells = 0;
  double best = 0.0;  // best crossing length found by the loop (infinity if none)
};

/// One labyrinth per annulus rho_n < |x| < rho_{n+1}, the shell construction
/// of the ball with s0 = rho_n / rho_{n+1} scaled by rho_{n+1}. J_n is chosen
/// with the verifier in the loop; budget-exhausted at the shell cap.
std::vector<ExhaustionLayer> exhaustion_labyrinth(const ExhaustionPlan& plan,
                                                  const ExhaustionParams& params);

/// Partial sums sum_{j <= J} sqrt(s_j - s_{j-1}) for J = 1..max_J.
std::vector<double> divergence_partial_sums(double s0, int max_J);

}  // namespace lab::shell
