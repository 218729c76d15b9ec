#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "labyrinth/domain.hpp"
#include "labyrinth/geometry.hpp"
#include "labyrinth/types.hpp"

namespace lab {

/// Radii s_0 < s_1 < ... < s_J < 1, sublevels s_{j,k} and tangent radii
/// r_j = a sqrt(s_j - s_{j-1}), all multiplied by `scale` when placed.
struct ShellSchedule {
  double s0 = 0.5;
  int J = 0;
  int m = 1;
  double t = 1.05;
  double c = 0.45;
  double a = 0.0;
  double scale = 1.0;
  std::vector<double> s;  // s[0] = s0, ..., s[J]

  double delta(int j) const { return s[j] - s[j - 1]; }
  /// s_{j,k} for 0 <= k <= m + 1 (k = 0 is s_{j-1}, k = m + 1 is s_j).
  double sublevel(int j, int k) const { return s[j - 1] + k * delta(j) / (m + 1); }
  double tangent_radius(int j) const;
  /// Separation used for the nets of shell j (see build_shell).
  double net_separation(int j) const { return 2.0 * t * tangent_radius(j) / sublevel(j, 1); }
};

enum class DomainType { kBall, kAnnulus, kEllipsoid, kPreset };

/// Where a labyrinth lives and which escape it blocks: paths from the body
/// inner * D to the boundary of outer * D, D the unit ball, an ellipsoid
/// {x^T A x < 1} or a named smooth preset.
struct DomainDescriptor {
  DomainType type = DomainType::kBall;
  int dim = 2;
  double inner = 0.5;
  double outer = 1.0;
  Mat shape;           // ellipsoid only
  std::string preset;  // preset only

  convex::ConvexDomain body() const;
};

std::string to_string(DomainType type);
DomainType domain_type_from_string(const std::string& name);

/// A labyrinth component: a flat ball, optionally pushed through a linear map
/// (ellipsoid pullbacks keep the ball in unit-ball coordinates plus the map).
struct Component {
  geom::FlatBall ball;
  std::optional<Mat> map;

  geom::Disc disc() const { return map ? geom::Disc(ball, *map) : geom::Disc(ball); }
};

/// Net parameters of one shell (the points are the component normals).
struct NetRecord {
  int j = 0;
  double r = 0.0;
  double c = 0.0;
  int m = 0;
  std::uint64_t seed = 0;
  std::vector<int> class_sizes;
};

/// One step of a patch-assembled labyrinth.
struct PatchStep {
  int patch = 0;
  double eta = 0.0;             // collar width before this step
  std::vector<double> depths;   // depths of the sublevel surfaces, decreasing
};

struct PatchRecord {
  std::vector<Vec> centers;
  std::vector<double> radii;
  double delta = 0.0;
  double eta = 0.0;
  double budget = 0.0;
  int rounds = 0;
  double final_eta = 0.0;
  std::vector<PatchStep> steps;
};

struct Labyrinth {
  int dim = 2;
  DomainDescriptor domain;
  std::optional<ShellSchedule> schedule;
  std::vector<Component> components;
  std::vector<NetRecord> nets;
  std::optional<PatchRecord> patches;
  std::optional<double> budget;
  std::uint64_t seed = 0;
};

}  // namespace lab
