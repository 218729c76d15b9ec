#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "labyrinth/types.hpp"

namespace lab::sampling {

/// Platform-independent generator: mt19937_64 with explicit bit-to-double
/// conversion (std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t bits() { return engine_(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n) % n; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b);

/// Radical inverse of `index` in the given prime base.
double radical_inverse(std::uint64_t index, int base);

/// Halton points in [0,1)^dim with a seed-derived Cranley-Patterson rotation.
class Halton {
 public:
  Halton(int dim, std::uint64_t seed);
  Vec next();

 private:
  int dim_;
  std::uint64_t index_ = 1;
  Vec shift_;
};

/// Antipodally symmetric low-discrepancy points on S^{d-1}: equal angles for
/// d = 2, a Fibonacci lattice for d = 3, normalized Box-Muller Halton points
/// for d >= 4. Returns an even count >= n.
std::vector<Vec> sphere_candidates(int d, std::size_t n);

/// Upper bound on max_{x in S^{d-1}} dist(x, candidates) for sphere_candidates(d, n).
/// Exact for d = 2; an empirically calibrated constant times n^{-1/(d-1)} otherwise.
double candidate_covering_bound(int d, std::size_t n);

/// Smallest candidate count whose covering bound is <= eps.
std::size_t candidate_count_for(int d, double eps);

/// Quasi-uniform sphere samples for covering-radius estimates (not antipodal).
std::vector<Vec> sphere_samples(int d, std::size_t n, std::uint64_t seed);

/// Farthest-point traversal over `points` starting at `start`. Stops after
/// `max_count` picks or when the farthest remaining distance drops below
/// `threshold` (relative tolerance 1e-12). Ties on distance are broken by a
/// seed-derived key. Returns picked indices in order, and the stopping
/// distance (covering radius of the picks over `points`) in `final_gap`.
std::vector<std::size_t> farthest_point_traversal(const std::vector<Vec>& points,
                                                  std::size_t start, double threshold,
                                                  std::size_t max_count, std::uint64_t seed,
                                                  double* final_gap = nullptr);

/// First `count` points of a farthest-point traversal of the sphere S^{n-1}.
std::vector<Vec> farthest_point_prefix(int n, int count);

}  // namespace lab::sampling
