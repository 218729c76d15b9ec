#pragma once

// Exact shortest escape among segment obstacles in the plane, from the disc
// |x| <= inner to the circle |x| = outer. Taut paths bend only at segment
// endpoints and leave/meet the circles radially, so a visibility graph over the
// endpoints is exact. Used only to cross-check the roadmap search.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

namespace oracle {

struct P {
  double x = 0.0;
  double y = 0.0;
};

inline P operator-(P a, P b) { return {a.x - b.x, a.y - b.y}; }
inline P operator+(P a, P b) { return {a.x + b.x, a.y + b.y}; }
inline P operator*(double s, P a) { return {s * a.x, s * a.y}; }
inline double cross(P a, P b) { return a.x * b.y - a.y * b.x; }
inline double norm(P a) { return std::hypot(a.x, a.y); }

// Closed segments [a,b] and [c,d] share a point.
inline bool segments_touch(P a, P b, P c, P d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on = [](P p, P q, P r) {  // r on [p,q] given collinear
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  if (d1 == 0 && on(a, b, c)) return true;
  if (d2 == 0 && on(a, b, d)) return true;
  if (d3 == 0 && on(c, d, a)) return true;
  if (d4 == 0 && on(c, d, b)) return true;
  return false;
}

class SegmentGrid {
 public:
  SegmentGrid(const std::vector<std::array<P, 2>>& segs, double cell) : segs_(segs), cell_(cell) {
    lo_ = {1e300, 1e300};
    P hi{-1e300, -1e300};
    for (const auto& s : segs_) {
      for (const P& p : s) {
        lo_.x = std::min(lo_.x, p.x);
        lo_.y = std::min(lo_.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
      }
    }
    nx_ = std::max(1, static_cast<int>((hi.x - lo_.x) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((hi.y - lo_.y) / cell_) + 1);
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      const auto [x0, y0] = index(segs_[i][0]);
      const auto [x1, y1] = index(segs_[i][1]);
      for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
        for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) cells_[y * nx_ + x].push_back(i);
    }
    stamp_.assign(segs_.size(), 0);
  }

  // True if [a, b] touches no obstacle.
  bool clear(P a, P b) {
    ++epoch_;
    const double len = norm(b - a);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / cell_)));
    for (int k = 0; k < pieces; ++k) {
      const P p = a + (static_cast<double>(k) / pieces) * (b - a);
      const P q = a + (static_cast<double>(k + 1) / pieces) * (b - a);
      const auto [x0, y0] = index(p);
      const auto [x1, y1] = index(q);
      for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) {
        for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) {
          for (std::size_t i : cells_[y * nx_ + x]) {
            if (stamp_[i] == epoch_) continue;
            stamp_[i] = epoch_;
            if (segments_touch(a, b, segs_[i][0], segs_[i][1])) return false;
          }
        }
      }
    }
    return true;
  }

 private:
  std::pair<int, int> index(P p) const {
    return {std::clamp(static_cast<int>((p.x - lo_.x) / cell_), 0, nx_ - 1),
            std::clamp(static_cast<int>((p.y - lo_.y) / cell_), 0, ny_ - 1)};
  }

  std::vector<std::array<P, 2>> segs_;
  double cell_;
  P lo_;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<unsigned> stamp_;
  unsigned epoch_ = 0;
};

// Shortest escape length, or nullopt if none is shorter than `upper`.
// `upper` must be the length of some valid escape (it only prunes).
inline std::optional<double> shortest_annulus_escape(const std::vector<std::array<P, 2>>& segs,
                                                     double inner, double outer, double upper,
                                                     double cell) {
  // A radial path with no bend exists iff the angular shadows miss a direction.
  {
    std::vector<std::pair<double, double>> shadows;
    for (const auto& s : segs) {
      double a0 = std::atan2(s[0].y, s[0].x);
      double a1 = std::atan2(s[1].y, s[1].x);
      if (a1 < a0) std::swap(a0, a1);
      if (a1 - a0 > std::numbers::pi) {
        shadows.push_back({a1, std::numbers::pi});
        shadows.push_back({-std::numbers::pi, a0});
      } else {
        shadows.push_back({a0, a1});
      }
    }
    std::sort(shadows.begin(), shadows.end());
    double reach = -std::numbers::pi;
    bool gap = shadows.empty();
    for (const auto& [a, b] : shadows) {
      if (a > reach) {
        gap = true;
        break;
      }
      reach = std::max(reach, b);
    }
    if (!gap && reach < std::numbers::pi) gap = true;
    if (gap) return outer - inner;
  }

  // Endpoints nudged 1e-9 beyond the tips so visibility through a tip is allowed.
  std::vector<P> nodes;
  for (const auto& s : segs) {
    const P u = (1.0 / norm(s[1] - s[0])) * (s[1] - s[0]);
    nodes.push_back(s[1] + 1e-9 * u);
    nodes.push_back(s[0] - 1e-9 * u);
  }
  SegmentGrid grid(segs, cell);
  const std::size_t n = nodes.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> done(n, 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  double best = upper;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = norm(nodes[i]);
    if (r <= inner || r >= outer) continue;
    if (grid.clear((inner / r) * nodes[i], nodes[i])) {
      dist[i] = r - inner;
      heap.push({dist[i], i});
    }
  }
  // Sort nodes by x for range scans.
  std::vector<std::size_t> by_x(n);
  for (std::size_t i = 0; i < n; ++i) by_x[i] = i;
  std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return nodes[a].x < nodes[b].x; });
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = nodes[by_x[i]].x;

  bool found = false;
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (done[u] || du > dist[u]) continue;
    done[u] = 1;
    const double ru = norm(nodes[u]);
    if (du + (outer - ru) >= best) continue;
    if (grid.clear(nodes[u], (outer / ru) * nodes[u])) {
      best = du + outer - ru;
      found = true;
    }
    const double reach = best - du;
    const auto first = std::lower_bound(xs.begin(), xs.end(), nodes[u].x - reach) - xs.begin();
    const auto last = std::upper_bound(xs.begin(), xs.end(), nodes[u].x + reach) - xs.begin();
    for (auto idx = first; idx < last; ++idx) {
      const std::size_t v = by_x[idx];
      if (done[v] || v == u) continue;
      const double rv = norm(nodes[v]);
      if (rv <= inner || rv >= outer) continue;
      const double w = norm(nodes[v] - nodes[u]);
      if (du + w >= dist[v] || du + w + (outer - rv) >= best) continue;
      if (!grid.clear(nodes[u], nodes[v])) continue;
      dist[v] = du + w;
      heap.push({dist[v], v});
    }
  }
  if (!found) return std::nullopt;
  return best;
}

}  // namespace oracle
