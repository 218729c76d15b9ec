#pragma once

#include <cstdint>
#include <vector>

#include "labyrinth/domain.hpp"
#include "labyrinth/labyrinth.hpp"

namespace lab::convex {

/// T = A^{1/2} maps the ellipsoid {x^T A x < 1} onto the unit ball.
struct Normalization {
  Mat T;
  Mat T_inverse;
  double norm = 0.0;          // |T|, operator norm
  double inverse_norm = 0.0;  // |T^{-1}|
};

Normalization normalize_ellipsoid(const Mat& shape);

/// Ball labyrinth pulled back into the ellipsoid: every component keeps its
/// unit-ball flat ball and carries T^{-1} as its map.
Labyrinth pullback_labyrinth(const Labyrinth& ball_labyrinth, const Mat& shape);

/// Affine chart z = e1 + L (y - x) near a boundary point x in which the
/// boundary osculates the unit sphere to second order at e1.
struct OsculatingMap {
  Vec point;     // x
  Mat linear;    // L
  Mat inverse;   // L^{-1}
  double validity_radius = 0.0;
  double deviation = 0.0;  // max | |z| - 1 | over sampled boundary within the radius
  double deviation_bound = 0.05;

  Vec to_local(const Vec& y) const;
  Vec from_local(const Vec& z) const;
};

OsculatingMap osculating_map(const ConvexDomain& domain, const Vec& x, double deviation_bound = 0.05);

/// Boundary-centered balls U_i covering the boundary, the collar width eta and
/// the separation delta of patch boundaries inside the collar.
struct PatchCover {
  std::vector<Vec> centers;
  std::vector<double> radii;
  double delta = 0.0;
  double eta = 0.0;
  double shrink = 1.0;        // uniform factor applied to the greedy radii
  std::size_t samples = 0;    // per-patch boundary samples used for delta
};

inline constexpr std::size_t kDefaultCoverSamples = 2048;

PatchCover patch_cover(const ConvexDomain& domain, double patch_radius, double eta,
                       std::size_t samples = kDefaultCoverSamples);

/// Sampled covering check: every boundary sample lies inside some patch.
bool covers_boundary(const ConvexDomain& domain, const PatchCover& cover, std::size_t samples);

/// min_j dist(V cap dU_j, V cap d(union_{i != j} U_i)) from `samples` points per patch sphere.
double measure_delta(const ConvexDomain& domain, const PatchCover& cover, std::size_t samples);

struct PatchSchedule {
  int rounds = 0;  // n = floor(M / delta) + 1
  std::vector<int> sequence;
};

PatchSchedule patch_schedule(const PatchCover& cover, double M);

struct PatchParams {
  double t = 1.05;
  double c = 0.45;
  int m = 0;                  // 0 picks the class capacity for (d, c)
  double band_top = 0.98;     // each step fills depths in (band_bottom, band_top) * eta_j
  double band_bottom = 0.8;
  double deviation_bound = 0.05;
  double collar_floor = 1e-6;
  std::uint64_t seed = 1;
};

/// Runs the schedule: step j builds one shell of tangent balls in the chart
/// of its patch, keeps the components lying inside the patch and strictly
/// inside the current collar, then shrinks the collar to their depth.
Labyrinth assemble_patch_labyrinth(const DomainDescriptor& domain, const PatchCover& cover, double M,
                                   const PatchParams& params = {});

/// Upper bound on the depth of every point of `disc` in the domain.
double max_depth_bound(const ConvexDomain& domain, const geom::Disc& disc);

}  // namespace lab::convex
