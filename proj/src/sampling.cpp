#include "labyrinth/sampling.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <tuple>

#include "labyrinth/error.hpp"
#include "labyrinth/kd_tree.hpp"

namespace lab::sampling {

namespace {

constexpr std::array<int, 16> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// Calibrated covering constants K_d with cover(n) <= K_d * n^{-1/(d-1)}; index is d.
// Measured maxima over 10^6 probes are roughly 0.6x these values.
constexpr std::array<double, 9> kCoverConstant{0.0, 0.0, 0.0, 4.0, 5.5, 6.0, 7.0, 8.0, 9.0};

Vec gaussian_from_uniform(const Vec& u, int d) {
  Vec g(d);
  for (int i = 0; i < d; i += 2) {
    const double u1 = std::max(u(i), 1e-300);
    const double u2 = u(i + 1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    g(i) = radius * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < d) g(i + 1) = radius * std::sin(2.0 * std::numbers::pi * u2);
  }
  return g;
}

std::vector<Vec> gaussian_sphere_points(int d, std::size_t n, std::uint64_t seed) {
  const int uniform_dims = d + (d % 2);
  Halton halton(uniform_dims, seed);
  std::vector<Vec> out;
  out.reserve(n);
  while (out.size() < n) {
    Vec g = gaussian_from_uniform(halton.next(), d);
    const double norm = g.norm();
    if (norm < 1e-12) continue;
    out.push_back(g / norm);
  }
  return out;
}

}  // namespace

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double scale = 1.0 / base;
  while (index > 0) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale /= base;
  }
  return result;
}

Halton::Halton(int dim, std::uint64_t seed) : dim_(dim), shift_(dim) {
  require(dim >= 1 && dim <= static_cast<int>(kPrimes.size()), ErrorKind::kInvalidInput,
          "halton: unsupported dimension");
  Rng rng(mix(seed, 0x4a1704ULL));
  for (int a = 0; a < dim; ++a) shift_(a) = seed == 0 ? 0.0 : rng.uniform();
}

Vec Halton::next() {
  Vec v(dim_);
  for (int a = 0; a < dim_; ++a) {
    double x = radical_inverse(index_, kPrimes[a]) + shift_(a);
    v(a) = x - std::floor(x);
  }
  ++index_;
  return v;
}

std::vector<Vec> sphere_candidates(int d, std::size_t n) {
  require(d >= 2 && d <= kMaxDim, ErrorKind::kInvalidInput, "sphere_candidates: bad dimension");
  const std::size_t half = std::max<std::size_t>(2, (n + 1) / 2);
  std::vector<Vec> out;
  out.reserve(2 * half);
  if (d == 2) {
    const std::size_t count = 2 * half;
    for (std::size_t i = 0; i < count; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / count;
      Vec p(2);
      p << std::cos(angle), std::sin(angle);
      out.push_back(p);
    }
    return out;
  }
  std::vector<Vec> upper;
  upper.reserve(half);
  if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < half; ++i) {
      const double z = 1.0 - (static_cast<double>(i) + 0.5) / half;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double theta = golden * static_cast<double>(i);
      Vec p(3);
      p << rho * std::cos(theta), rho * std::sin(theta), z;
      upper.push_back(p);
    }
  } else {
    upper = gaussian_sphere_points(d, half, 0);
  }
  for (const Vec& p : upper) {
    out.push_back(p);
    out.push_back(-p);
  }
  return out;
}

double candidate_covering_bound(int d, std::size_t n) {
  const std::size_t half = std::max<std::size_t>(2, (n + 1) / 2);
  const auto count = static_cast<double>(2 * half);
  if (d == 2) return 2.0 * std::sin(std::numbers::pi / (2.0 * count));
  return kCoverConstant[d] * std::pow(count, -1.0 / (d - 1));
}

std::size_t candidate_count_for(int d, double eps) {
  require(eps > 0.0, ErrorKind::kInvalidInput, "candidate_count_for: eps must be positive");
  double count = 0.0;
  if (d == 2) {
    count = std::numbers::pi / (2.0 * std::asin(std::min(1.0, eps / 2.0)));
  } else {
    count = std::pow(kCoverConstant[d] / eps, d - 1);
  }
  if (!(count < 1e15)) return static_cast<std::size_t>(1e15);
  auto n = static_cast<std::size_t>(std::ceil(count));
  n += n % 2;
  return std::max<std::size_t>(n, 4);
}

std::vector<Vec> sphere_samples(int d, std::size_t n, std::uint64_t seed) {
  require(d >= 2 && d <= kMaxDim, ErrorKind::kInvalidInput, "sphere_samples: bad dimension");
  if (d == 2) {
    Rng rng(mix(seed, 0x5a3e));
    const double shift = rng.uniform();
    std::vector<Vec> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = 2.0 * std::numbers::pi * (static_cast<double>(i) + shift) / n;
      Vec p(2);
      p << std::cos(angle), std::sin(angle);
      out.push_back(p);
    }
    return out;
  }
  return gaussian_sphere_points(d, n, mix(seed, 0x5a3e) | 1ULL);
}

std::vector<std::size_t> farthest_point_traversal(const std::vector<Vec>& points,
                                                  std::size_t start, double threshold,
                                                  std::size_t max_count, std::uint64_t seed,
                                                  double* final_gap) {
  require(!points.empty() && start < points.size(), ErrorKind::kInvalidInput,
          "farthest_point_traversal: bad start");
  const std::size_t n = points.size();
  const KdTree tree(points);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint64_t> key(n);
  for (std::size_t i = 0; i < n; ++i) key[i] = mix(seed, i);

  using Entry = std::tuple<double, std::uint64_t, std::size_t>;
  std::priority_queue<Entry> heap;
  std::vector<std::size_t> picks;
  std::vector<std::size_t> nearby;
  double gap = 0.0;
  double reach = std::numeric_limits<double>::infinity();

  std::size_t next = start;
  while (true) {
    picks.push_back(next);
    dist[next] = 0.0;
    const Vec& p = points[next];
    if (std::isinf(reach)) {
      nearby.resize(n);
      for (std::size_t i = 0; i < n; ++i) nearby[i] = i;
    } else {
      tree.radius_search(p, reach, nearby);
    }
    for (std::size_t j : nearby) {
      const double dj = (points[j] - p).norm();
      if (dj < dist[j]) {
        dist[j] = dj;
        heap.emplace(dj, key[j], j);
      }
    }
    bool found = false;
    while (!heap.empty()) {
      const auto [dj, kj, j] = heap.top();
      if (dj != dist[j] || dj == 0.0) {
        heap.pop();
        continue;
      }
      found = true;
      gap = dj;
      next = j;
      break;
    }
    if (!found) {
      gap = 0.0;
      break;
    }
    if (picks.size() >= max_count || gap < threshold * (1.0 - 1e-12)) break;
    reach = gap;
  }
  if (final_gap != nullptr) *final_gap = gap;
  return picks;
}

std::vector<Vec> farthest_point_prefix(int n, int count) {
  require(count >= 1, ErrorKind::kInvalidInput, "farthest_point_prefix: count must be >= 1");
  if (n == 1) {
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i) {
      Vec p(1);
      p(0) = i % 2 == 0 ? 1.0 : -1.0;
      out.push_back(p);
    }
    return out;
  }
  const auto candidates =
      sphere_candidates(n, std::max<std::size_t>(4096, static_cast<std::size_t>(64) * count));
  const auto picks = farthest_point_traversal(candidates, 0, 0.0, count, 0);
  std::vector<Vec> out;
  out.reserve(picks.size());
  for (std::size_t i : picks) out.push_back(candidates[i]);
  return out;
}

}  // namespace lab::sampling
