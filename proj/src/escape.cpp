#include "labyrinth/escape.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <queue>
#include <thread>

#include "labyrinth/error.hpp"
#include "labyrinth/kd_tree.hpp"
#include "labyrinth/sampling.hpp"

namespace lab::escape {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-thread visit stamps for deduplicating grid candidates.
struct StampSet {
  std::vector<std::uint32_t> marks;
  std::uint32_t epoch = 0;

  void begin(std::size_t n) {
    if (marks.size() < n) marks.resize(n, 0);
    if (++epoch == 0) {
      std::fill(marks.begin(), marks.end(), 0);
      epoch = 1;
    }
  }
  bool first_visit(std::uint32_t i) {
    if (marks[i] == epoch) return false;
    marks[i] = epoch;
    return true;
  }
};

thread_local StampSet tls_stamps;

std::size_t thread_limit(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LABYRINTH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

}  // namespace

// ---------------------------------------------------------------- regions

Region Region::shell(std::shared_ptr<const convex::ConvexDomain> domain, double inner, double outer) {
  require(domain != nullptr, ErrorKind::kInvalidInput, "region: missing domain");
  require(inner >= 0.0 && outer > inner, ErrorKind::kInvalidInput, "region: need 0 <= inner < outer");
  Region r;
  r.kind = Kind::kShell;
  const int d = domain->dim();
  r.lo = Vec(d);
  r.hi = Vec(d);
  for (int i = 0; i < d; ++i) {
    r.hi(i) = outer * domain->support(unit(d, i));
    r.lo(i) = -outer * domain->support(-unit(d, i));
  }
  r.domain = std::move(domain);
  r.inner = inner;
  r.outer = outer;
  return r;
}

Region Region::box(const Vec& lo, const Vec& hi) {
  require(lo.size() == hi.size() && lo.size() >= 2, ErrorKind::kInvalidInput, "region: bad box");
  require((hi - lo).minCoeff() > 0.0, ErrorKind::kInvalidInput, "region: empty box");
  Region r;
  r.kind = Kind::kBox;
  r.lo = lo;
  r.hi = hi;
  return r;
}

bool Region::contains(const Vec& x) const {
  if ((x - lo).minCoeff() < 0.0 || (hi - x).minCoeff() < 0.0) return false;
  if (kind == Kind::kBox) return true;
  const double g = domain->gauge(x);
  return g > inner && g < outer;
}

double Region::volume_estimate() const { return (hi - lo).prod(); }

// -------------------------------------------------------------- terminals

Terminal Terminal::at(const Vec& p) {
  Terminal t;
  t.kind = Kind::kPoint;
  t.point = p;
  return t;
}

Terminal Terminal::body(std::shared_ptr<const convex::ConvexDomain> domain, double scale) {
  Terminal t;
  t.kind = Kind::kBody;
  t.domain = std::move(domain);
  t.scale = scale;
  return t;
}

Terminal Terminal::boundary(std::shared_ptr<const convex::ConvexDomain> domain, double scale) {
  Terminal t;
  t.kind = Kind::kBoundary;
  t.domain = std::move(domain);
  t.scale = scale;
  return t;
}

double Terminal::distance(const Vec& x, Vec* nearest) const {
  switch (kind) {
    case Kind::kPoint:
      if (nearest) *nearest = point;
      return (x - point).norm();
    case Kind::kBody: return domain->body_distance(x, scale, nearest);
    case Kind::kBoundary: return domain->boundary_distance(x, scale, nearest);
  }
  return kInf;
}

// -------------------------------------------------------------- obstacles

Obstacles::Obstacles(std::vector<geom::Disc> discs, int dim) : dim_(dim), discs_(std::move(discs)) {
  axes_ = std::min(dim_, 3);
  if (discs_.empty()) return;
  Vec lo = Vec::Constant(axes_, kInf);
  Vec hi = Vec::Constant(axes_, -kInf);
  std::vector<double> diameters;
  diameters.reserve(discs_.size());
  for (const auto& disc : discs_) {
    const double r = disc.bounding_radius();
    lo = lo.cwiseMin(disc.center().head(axes_) - Vec::Constant(axes_, r));
    hi = hi.cwiseMax(disc.center().head(axes_) + Vec::Constant(axes_, r));
    diameters.push_back(2.0 * r);
  }
  std::nth_element(diameters.begin(), diameters.begin() + diameters.size() / 2, diameters.end());
  const double median = diameters[diameters.size() / 2];
  const Vec extent = (hi - lo).cwiseMax(Vec::Constant(axes_, 1e-9));
  const double limit = axes_ == 2 ? 4.0e6 : 2.0e6;
  cell_ = std::max(median, std::pow(extent.prod() / limit, 1.0 / axes_));
  origin_ = lo;
  cells_.assign(axes_, 1);
  std::size_t total = 1;
  for (int a = 0; a < axes_; ++a) {
    cells_[a] = std::max(1, static_cast<int>(std::ceil(extent(a) / cell_)));
    total *= static_cast<std::size_t>(cells_[a]);
  }

  // Two passes (count, fill) over each disc's cell range.
  auto range = [&](const geom::Disc& disc, std::array<int, 3>& from, std::array<int, 3>& to) {
    std::size_t count = 1;
    for (int a = 0; a < axes_; ++a) {
      const double r = disc.bounding_radius();
      from[a] = std::clamp(static_cast<int>(std::floor((disc.center()(a) - r - origin_(a)) / cell_)), 0,
                           cells_[a] - 1);
      to[a] = std::clamp(static_cast<int>(std::floor((disc.center()(a) + r - origin_(a)) / cell_)), 0,
                         cells_[a] - 1);
      count *= static_cast<std::size_t>(to[a] - from[a] + 1);
    }
    return count;
  };
  auto for_cells = [&](const std::array<int, 3>& from, const std::array<int, 3>& to, auto&& f) {
    const int z0 = axes_ > 2 ? from[2] : 0;
    const int z1 = axes_ > 2 ? to[2] : 0;
    for (int z = z0; z <= z1; ++z)
      for (int y = from[1]; y <= to[1]; ++y)
        for (int x = from[0]; x <= to[0]; ++x)
          f((static_cast<std::size_t>(z) * cells_[1] + y) * cells_[0] + x);
  };
  constexpr std::size_t kOversized = 1u << 14;
  std::vector<std::uint32_t> counts(total + 1, 0);
  std::array<int, 3> from{};
  std::array<int, 3> to{};
  for (std::size_t i = 0; i < discs_.size(); ++i) {
    if (range(discs_[i], from, to) > kOversized) {
      oversized_.push_back(static_cast<std::uint32_t>(i));
      continue;
    }
    for_cells(from, to, [&](std::size_t c) { ++counts[c + 1]; });
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  cell_start_ = counts;
  cell_items_.resize(cell_start_.back());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < discs_.size(); ++i) {
    if (range(discs_[i], from, to) > kOversized) continue;
    for_cells(from, to, [&](std::size_t c) { cell_items_[fill[c]++] = static_cast<std::uint32_t>(i); });
  }
}

template <typename F>
bool Obstacles::visit_box(const Vec& lo, const Vec& hi, F&& f) const {
  for (std::uint32_t i : oversized_) {
    if (f(i)) return true;
  }
  if (cell_start_.empty()) return false;
  std::array<int, 3> from{0, 0, 0};
  std::array<int, 3> to{0, 0, 0};
  for (int a = 0; a < axes_; ++a) {
    const double l = (lo(a) - origin_(a)) / cell_;
    const double h = (hi(a) - origin_(a)) / cell_;
    if (h < 0.0 || l >= cells_[a]) return false;
    from[a] = std::clamp(static_cast<int>(std::floor(l)), 0, cells_[a] - 1);
    to[a] = std::clamp(static_cast<int>(std::floor(h)), 0, cells_[a] - 1);
  }
  StampSet& stamps = tls_stamps;
  stamps.begin(discs_.size());
  for (int z = from[2]; z <= to[2]; ++z) {
    for (int y = from[1]; y <= to[1]; ++y) {
      for (int x = from[0]; x <= to[0]; ++x) {
        const std::size_t c = (static_cast<std::size_t>(z) * cells_[1] + y) * cells_[0] + x;
        for (std::uint32_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
          const std::uint32_t i = cell_items_[k];
          if (stamps.first_visit(i) && f(i)) return true;
        }
      }
    }
  }
  return false;
}

bool Obstacles::segment_free(const Vec& a, const Vec& b, double clearance) const {
  if (discs_.empty()) return true;
  const Vec pad = Vec::Constant(axes_, clearance + kTol.predicate);
  const Vec lo = a.head(axes_).cwiseMin(b.head(axes_)) - pad;
  const Vec hi = a.head(axes_).cwiseMax(b.head(axes_)) + pad;
  return !visit_box(lo, hi, [&](std::uint32_t i) { return discs_[i].segment_hits(a, b, clearance); });
}

bool Obstacles::segment_free_exhaustive(const Vec& a, const Vec& b, double clearance) const {
  for (const auto& disc : discs_) {
    if (disc.segment_hits(a, b, clearance)) return false;
  }
  return true;
}

std::optional<std::size_t> Obstacles::nearest(const Vec& x, double within) const {
  if (discs_.empty()) return std::nullopt;
  const Vec pad = Vec::Constant(axes_, within);
  std::optional<std::size_t> best;
  double best_dist = within;
  visit_box(x.head(axes_) - pad, x.head(axes_) + pad, [&](std::uint32_t i) {
    const double dist = discs_[i].distance(x);
    if (dist <= best_dist) {
      best_dist = dist;
      best = i;
    }
    return false;
  });
  return best;
}

bool Obstacles::point_free(const Vec& x, double clearance) const {
  if (discs_.empty()) return true;
  const double limit = std::max(clearance, kTol.predicate);
  const Vec pad = Vec::Constant(axes_, limit);
  return !visit_box(x.head(axes_) - pad, x.head(axes_) + pad,
                    [&](std::uint32_t i) { return discs_[i].distance(x) <= limit; });
}

// ---------------------------------------------------------------- roadmap

std::size_t Roadmap::edge_count() const {
  std::size_t n = 0;
  for (const auto& adj : adjacency) n += adj.size();
  return n / 2;
}

double polyline_length(const std::vector<Vec>& points) {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

double rim_step(double radius) { return std::min(1e-3, 0.02 * radius); }

RimGraph build_rim_graph(const Region& region, const Obstacles& obstacles, double clearance) {
  require(clearance >= 0.0, ErrorKind::kInvalidInput, "build_roadmap: negative clearance");
  const int d = region.dim();
  RimGraph g;
  g.clearance = clearance;
  std::vector<double> owner_radius;
  for (const auto& disc : obstacles.discs()) {
    const double off = clearance + rim_step(disc.bounding_radius());
    const auto rim = disc.rim_samples(d == 2 ? 2 : 12 * (d - 2));
    for (std::size_t q = 0; q + 1 < rim.size(); ++q) {
      const Vec x = rim[q] + off * (rim[q] - disc.center()).normalized();
      if (!region.contains(x) || !obstacles.point_free(x, clearance)) continue;
      g.nodes.push_back(x);
      g.owner.push_back(static_cast<std::uint32_t>(&disc - obstacles.discs().data()));
      owner_radius.push_back(disc.bounding_radius());
    }
  }
  if (g.nodes.empty()) return g;
  // Rim nodes see each other across a few component radii. Each candidate
  // pair is keyed by its anchor, the end with the larger reach, so that every
  // disc able to block it lies near the anchor.
  constexpr std::size_t kRimNeighbours = 256;
  const KdTree tree(g.nodes);
  auto anchor_first = [&](std::size_t i, std::size_t j) {
    const bool swap = owner_radius[j] > owner_radius[i] || (owner_radius[j] == owner_radius[i] && j < i);
    return swap ? (static_cast<std::uint64_t>(j) << 32) | i : (static_cast<std::uint64_t>(i) << 32) | j;
  };
  std::vector<std::uint64_t> pairs;
  std::vector<std::size_t> near;
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    tree.radius_search(g.nodes[i], 3.0 * owner_radius[i], near);
    ranked.clear();
    for (std::size_t j : near) {
      if (j != i) ranked.push_back({(g.nodes[j] - g.nodes[i]).squaredNorm(), j});
    }
    if (ranked.size() > kRimNeighbours) {
      std::nth_element(ranked.begin(), ranked.begin() + kRimNeighbours, ranked.end());
      ranked.resize(kRimNeighbours);
    }
    for (const auto& [dist, j] : ranked) pairs.push_back(anchor_first(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<Vec> centers;
  double max_radius = 0.0;
  for (const auto& disc : obstacles.discs()) {
    centers.push_back(disc.center());
    max_radius = std::max(max_radius, disc.bounding_radius());
  }
  const KdTree disc_tree(centers);
  std::vector<std::pair<double, std::size_t>> local;  // discs near the anchor, nearest first
  for (std::size_t p = 0; p < pairs.size();) {
    const auto i = static_cast<std::uint32_t>(pairs[p] >> 32);
    const Vec& a = g.nodes[i];
    disc_tree.radius_search(a, 3.0 * owner_radius[i] + max_radius + clearance + kTol.predicate, near);
    local.clear();
    for (std::size_t q : near) local.push_back({(centers[q] - a).squaredNorm(), q});
    std::sort(local.begin(), local.end());
    for (; p < pairs.size() && (pairs[p] >> 32) == i; ++p) {
      const auto j = static_cast<std::uint32_t>(pairs[p] & 0xffffffffu);
      const Vec& b = g.nodes[j];
      // Most candidates cross one of their own discs.
      if (obstacles[g.owner[i]].segment_hits(a, b, clearance) ||
          obstacles[g.owner[j]].segment_hits(a, b, clearance)) {
        continue;
      }
      const double reach = (b - a).norm() + max_radius + clearance + kTol.predicate;
      bool free = true;
      for (const auto& [dist, q] : local) {
        if (dist > reach * reach) break;
        if (obstacles[q].segment_hits(a, b, clearance)) {
          free = false;
          break;
        }
      }
      if (free) g.edges.push_back({std::min(i, j), std::max(i, j)});
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

Roadmap build_roadmap(const Region& region, const Obstacles& obstacles, std::size_t node_budget,
                      double clearance, std::uint64_t seed) {
  return build_roadmap(region, obstacles, build_rim_graph(region, obstacles, clearance), node_budget, seed);
}

Roadmap build_roadmap(const Region& region, const Obstacles& obstacles, const RimGraph& rim,
                      std::size_t node_budget, std::uint64_t seed) {
  require(node_budget >= 100, ErrorKind::kInvalidInput, "build_roadmap: node budget below 100");
  const int d = region.dim();
  const double clearance = rim.clearance;
  Roadmap rm;
  rm.clearance = clearance;
  rm.nodes = rim.nodes;
  rm.rim_nodes = rim.nodes.size();

  // Quasi-uniform free samples.
  sampling::Halton halton(d, seed);
  const Vec span = region.hi - region.lo;
  std::size_t attempts = 0;
  const std::size_t max_attempts = node_budget * 1000;
  while (rm.free_nodes < node_budget) {
    require(++attempts <= max_attempts, ErrorKind::kResourceLimit,
            "build_roadmap: free-space rejection rate above 99.9%");
    const Vec x = region.lo + halton.next().cwiseProduct(span);
    if (!region.contains(x) || !obstacles.point_free(x, clearance)) continue;
    rm.nodes.push_back(x);
    ++rm.free_nodes;
  }
  const double accepted_volume =
      region.volume_estimate() * static_cast<double>(rm.free_nodes) / static_cast<double>(attempts);
  rm.connection_radius = std::pow(accepted_volume / static_cast<double>(rm.free_nodes), 1.0 / d);

  // k nearest neighbours of every node; rim-rim edges come precomputed.
  const std::size_t k = d == 2 ? 12 : 16;
  std::vector<std::uint64_t> pairs;
  const KdTree all(rm.nodes);
  for (std::size_t i = 0; i < rm.nodes.size(); ++i) {
    for (const auto& [dist, j] : all.knn(rm.nodes[i], k + 1)) {
      if (j == i || (i < rm.rim_nodes && j < rm.rim_nodes)) continue;
      pairs.push_back((static_cast<std::uint64_t>(std::min(i, j)) << 32) | std::max(i, j));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  rm.adjacency.assign(rm.nodes.size(), {});
  auto link = [&](std::uint32_t i, std::uint32_t j) {
    const double w = (rm.nodes[i] - rm.nodes[j]).norm();
    rm.adjacency[i].push_back({j, w});
    rm.adjacency[j].push_back({i, w});
  };
  for (const auto& [i, j] : rim.edges) link(i, j);
  for (std::uint64_t key : pairs) {
    const auto i = static_cast<std::uint32_t>(key >> 32);
    const auto j = static_cast<std::uint32_t>(key & 0xffffffffu);
    if (obstacles.segment_free(rm.nodes[i], rm.nodes[j], clearance)) link(i, j);
  }
  return rm;
}

// ----------------------------------------------------------- graph search

std::optional<EscapePath> shortest_escape(const Roadmap& rm, const Obstacles& obstacles,
                                          const Terminal& source, const Terminal& target) {
  const std::size_t n = rm.nodes.size();
  if (n == 0) return std::nullopt;
  const double reach = 4.0 * rm.connection_radius;

  // Terminal attachments: straight segment to the nearest terminal point.
  std::vector<double> to_target(n, kInf);
  std::vector<Vec> target_foot(n);
  std::vector<double> dist(n, kInf);
  std::vector<Vec> source_foot(n);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t i = 0; i < n; ++i) {
    Vec p;
    const double ds = source.distance(rm.nodes[i], &p);
    if (ds <= reach && obstacles.segment_free(p, rm.nodes[i], rm.clearance)) {
      dist[i] = ds;
      source_foot[i] = p;
      heap.push({ds, static_cast<std::uint32_t>(i)});
    }
    const double dt = target.distance(rm.nodes[i], &p);
    if (dt <= reach && obstacles.segment_free(rm.nodes[i], p, rm.clearance)) {
      to_target[i] = dt;
      target_foot[i] = p;
    }
  }

  std::vector<std::uint32_t> parent(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<char> done(n, 0);
  double best = kInf;
  std::size_t best_node = n;
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (done[u] || du > dist[u]) continue;
    if (du >= best) break;
    done[u] = 1;
    if (du + to_target[u] < best) {
      best = du + to_target[u];
      best_node = u;
    }
    for (const auto& [v, w] : rm.adjacency[u]) {
      if (du + w < dist[v]) {
        dist[v] = du + w;
        parent[v] = u;
        heap.push({dist[v], v});
      }
    }
  }
  if (best_node == n) return std::nullopt;

  std::vector<Vec> chain;
  std::size_t v = best_node;
  while (true) {
    chain.push_back(rm.nodes[v]);
    if (parent[v] == std::numeric_limits<std::uint32_t>::max()) break;
    v = parent[v];
  }
  std::reverse(chain.begin(), chain.end());
  EscapePath path;
  path.clearance = rm.clearance;
  path.polyline.push_back(source_foot[v]);
  for (const Vec& x : chain) {
    if ((x - path.polyline.back()).norm() > 0.0) path.polyline.push_back(x);
  }
  if ((target_foot[best_node] - path.polyline.back()).norm() > 0.0) {
    path.polyline.push_back(target_foot[best_node]);
  }
  if (path.polyline.size() < 2) path.polyline.push_back(target_foot[best_node]);
  path.length = polyline_length(path.polyline);
  return path;
}

// ------------------------------------------------------------- shortcut

namespace {

// Greedy visibility pass: from each kept vertex jump to the farthest
// reachable vertex found by doubling then bisection.
void string_pull(std::vector<Vec>& pts, const Obstacles& obs, double clearance) {
  if (pts.size() < 3) return;
  std::vector<Vec> out{pts.front()};
  std::size_t i = 0;
  const std::size_t last = pts.size() - 1;
  while (i < last) {
    std::size_t good = i + 1;
    std::size_t step = 1;
    std::size_t bad = last + 1;
    while (good + step <= last) {
      if (obs.segment_free(pts[i], pts[good + step], clearance)) {
        good += step;
        step *= 2;
      } else {
        bad = good + step;
        break;
      }
    }
    if (bad == last + 1 && good < last && obs.segment_free(pts[i], pts[last], clearance)) good = last;
    while (bad <= last && bad - good > 1) {
      const std::size_t mid = (good + bad) / 2;
      (obs.segment_free(pts[i], pts[mid], clearance) ? good : bad) = mid;
    }
    out.push_back(pts[good]);
    i = good;
  }
  pts = std::move(out);
}

bool reproject_ends(std::vector<Vec>& pts, const Obstacles& obs, const Terminal& source,
                    const Terminal& target, double clearance) {
  bool changed = false;
  // Source side: the largest k whose direct connection beats the prefix.
  double prefix = 0.0;
  std::vector<double> prefix_len(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    prefix += (pts[k] - pts[k - 1]).norm();
    prefix_len[k] = prefix;
  }
  for (std::size_t k = pts.size() - 1; k >= 1; --k) {
    Vec q;
    const double dq = source.distance(pts[k], &q);
    if (dq < prefix_len[k] - 1e-13 && obs.segment_free(q, pts[k], clearance)) {
      std::vector<Vec> next{q};
      next.insert(next.end(), pts.begin() + static_cast<long>(k), pts.end());
      pts = std::move(next);
      changed = true;
      break;
    }
  }
  double suffix = 0.0;
  std::vector<double> suffix_len(pts.size(), 0.0);
  for (std::size_t k = pts.size() - 1; k-- > 0;) {
    suffix += (pts[k + 1] - pts[k]).norm();
    suffix_len[k] = suffix;
  }
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    Vec q;
    const double dq = target.distance(pts[k], &q);
    if (dq < suffix_len[k] - 1e-13 && obs.segment_free(pts[k], q, clearance)) {
      pts.resize(k + 1);
      pts.push_back(q);
      changed = true;
      break;
    }
  }
  return changed;
}

// Moves interior vertices toward the midpoint of their neighbours while the
// two adjacent segments stay free. Returns the length decrease.
double relax(std::vector<Vec>& pts, const Obstacles& obs, double clearance) {
  double gain = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec mid = 0.5 * (pts[i - 1] + pts[i + 1]);
    const double before = (pts[i] - pts[i - 1]).norm() + (pts[i + 1] - pts[i]).norm();
    for (double lambda = 1.0; lambda >= 1.0 / 64.0; lambda *= 0.5) {
      const Vec q = pts[i] + lambda * (mid - pts[i]);
      const double after = (q - pts[i - 1]).norm() + (pts[i + 1] - q).norm();
      if (after >= before) break;
      if (obs.segment_free(pts[i - 1], q, clearance) && obs.segment_free(q, pts[i + 1], clearance)) {
        pts[i] = q;
        gain += before - after;
        break;
      }
    }
  }
  return gain;
}

// Pulls vertices onto the component edge they wrap, leaving `gap` of room.
double snap(std::vector<Vec>& pts, const Obstacles& obs, double clearance) {
  constexpr double kReach = 4e-3;
  const double gap = clearance + 1e-8;
  double gain = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const auto near = obs.nearest(pts[i], clearance + kReach);
    if (!near) continue;
    const Vec p = obs[*near].project(pts[i]);
    const Vec away = pts[i] - p;
    const double len = away.norm();
    if (len <= gap) continue;
    const Vec q = p + (gap / len) * away;
    const double before = (pts[i] - pts[i - 1]).norm() + (pts[i + 1] - pts[i]).norm();
    const double after = (q - pts[i - 1]).norm() + (pts[i + 1] - q).norm();
    if (after >= before) continue;
    if (obs.segment_free(pts[i - 1], q, clearance) && obs.segment_free(q, pts[i + 1], clearance)) {
      pts[i] = q;
      gain += before - after;
    }
  }
  return gain;
}

void drop_duplicates(std::vector<Vec>& pts) {
  std::vector<Vec> out;
  for (const Vec& x : pts) {
    if (out.empty() || (x - out.back()).norm() > 0.0) out.push_back(x);
  }
  if (out.size() == 1 && pts.size() > 1) out.push_back(pts.back());
  pts = std::move(out);
}

}  // namespace

EscapePath shortcut(const EscapePath& path, const Obstacles& obstacles, const Terminal& source,
                    const Terminal& target, int rounds, std::uint64_t seed) {
  std::vector<Vec> pts = path.polyline;
  const double clearance = path.clearance;
  sampling::Rng rng(seed);
  double length = polyline_length(pts);
  auto accept = [&](std::vector<Vec>& candidate) {
    drop_duplicates(candidate);
    const double len = polyline_length(candidate);
    if (len <= length) {
      pts = candidate;
      length = len;
    }
  };

  {
    auto c = pts;
    string_pull(c, obstacles, clearance);
    accept(c);
  }
  for (int r = 0; r < rounds && pts.size() > 2; ++r) {
    const std::size_t n = pts.size();
    std::size_t i = rng.index(n);
    std::size_t j = rng.index(n);
    if (i > j) std::swap(i, j);
    if (j < i + 2) continue;
    if (!obstacles.segment_free(pts[i], pts[j], clearance)) continue;
    auto c = pts;
    c.erase(c.begin() + static_cast<long>(i) + 1, c.begin() + static_cast<long>(j));
    accept(c);
  }
  for (int sweep = 0; sweep < 400; ++sweep) {
    auto c = pts;
    const double gain = snap(c, obstacles, clearance) + relax(c, obstacles, clearance);
    reproject_ends(c, obstacles, source, target, clearance);
    if (sweep % 8 == 7) string_pull(c, obstacles, clearance);
    const double before = length;
    accept(c);
    if (gain <= 1e-12 * std::max(1.0, length) && before - length <= 1e-12 * std::max(1.0, length)) break;
  }
  EscapePath out;
  out.polyline = std::move(pts);
  out.length = polyline_length(out.polyline);
  out.clearance = clearance;
  return out;
}

bool certify(const EscapePath& path, const Obstacles& obstacles, const Terminal& source,
             const Terminal& target) {
  const auto& p = path.polyline;
  if (p.size() < 2) return false;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (!((p[i] - p[i - 1]).norm() > 0.0)) return false;
    if (!obstacles.segment_free_exhaustive(p[i - 1], p[i], path.clearance)) return false;
  }
  if (source.distance(p.front()) > 1e-9 || target.distance(p.back()) > 1e-9) return false;
  return std::abs(polyline_length(p) - path.length) <= 1e-12 * std::max(1.0, path.length);
}

// ----------------------------------------------------------- multi-start

Effort Effort::standard(int dim) {
  Effort e;
  if (dim >= 3) e.budgets = {10000, 40000};
  return e;
}

EscapeProblem escape_problem(const Labyrinth& lab) {
  auto body = std::make_shared<const convex::ConvexDomain>(lab.domain.body());
  std::vector<geom::Disc> discs;
  discs.reserve(lab.components.size());
  for (const auto& c : lab.components) discs.push_back(c.disc());
  EscapeProblem p{Region::shell(body, lab.domain.inner, lab.domain.outer),
                  Terminal::body(body, lab.domain.inner), Terminal::boundary(body, lab.domain.outer),
                  Obstacles(std::move(discs), lab.dim)};
  return p;
}

EscapeReport min_escape_length(const EscapeProblem& problem, const Effort& effort) {
  require(!effort.seeds.empty() && !effort.budgets.empty(), ErrorKind::kInvalidInput,
          "min_escape_length: empty effort");
  struct Job {
    std::uint64_t seed;
    std::size_t budget;
  };
  std::vector<Job> jobs;
  for (std::size_t budget : effort.budgets) {
    for (std::uint64_t seed : effort.seeds) jobs.push_back({seed, budget});
  }
  const RimGraph rim = build_rim_graph(problem.region, problem.obstacles, effort.clearance);
  std::vector<Attempt> attempts(jobs.size());
  std::vector<std::optional<EscapePath>> found(jobs.size());
  std::mutex error_mutex;
  std::exception_ptr error;

  auto run = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    Attempt& at = attempts[idx];
    at.seed = job.seed;
    at.budget = job.budget;
    const Roadmap rm =
        build_roadmap(problem.region, problem.obstacles, rim, job.budget, sampling::mix(job.seed, job.budget));
    at.nodes = rm.nodes.size();
    at.edges = rm.edge_count();
    auto path = shortest_escape(rm, problem.obstacles, problem.source, problem.target);
    if (!path) return;
    EscapePath tight = shortcut(*path, problem.obstacles, problem.source, problem.target,
                                effort.shortcut_rounds, job.seed);
    if (!certify(tight, problem.obstacles, problem.source, problem.target)) {
      if (!certify(*path, problem.obstacles, problem.source, problem.target)) return;
      tight = *path;
    }
    at.length = tight.length;
    found[idx] = std::move(tight);
  };

  const std::size_t threads = thread_limit(jobs.size());
  if (threads == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            run(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  EscapeReport report;
  report.attempts = attempts;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (found[i] && (!report.best || found[i]->length < report.best->length)) report.best = found[i];
  }
  report.note =
      "upper-bound search: the best length is the shortest certified escape found at this effort; "
      "it bounds the true infimum from above and finding no short path is evidence, not proof";
  return report;
}

EscapeReport min_escape_length(const Labyrinth& lab, const Effort& effort) {
  return min_escape_length(escape_problem(lab), effort);
}

}  // namespace lab::escape
