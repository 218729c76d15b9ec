#include "labyrinth/kd_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "labyrinth/error.hpp"

namespace lab {

namespace {
constexpr std::uint32_t kLeafSize = 12;
}

KdTree::KdTree(const std::vector<Vec>& points) : count_(points.size()) {
  if (points.empty()) return;
  dim_ = static_cast<int>(points.front().size());
  require(points.size() < std::numeric_limits<std::uint32_t>::max(), ErrorKind::kResourceLimit,
          "kd-tree: too many points");
  coords_.resize(count_ * dim_);
  for (std::size_t i = 0; i < count_; ++i) {
    require(points[i].size() == dim_, ErrorKind::kInvalidInput, "kd-tree: mixed dimensions");
    for (int a = 0; a < dim_; ++a) coords_[i * dim_ + a] = points[i](a);
  }
  order_.resize(count_);
  for (std::uint32_t i = 0; i < count_; ++i) order_[i] = i;
  nodes_.reserve(2 * count_ / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(count_));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{-1, 0.0, begin, end, -1, -1});
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  double widest = -1.0;
  for (int a = 0; a < dim_; ++a) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const double v = coords_[order_[i] * dim_ + a];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      axis = a;
    }
  }
  if (widest <= 0.0) return id;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) {
                     const double vx = coords_[x * dim_ + axis];
                     const double vy = coords_[y * dim_ + axis];
                     return vx < vy || (vx == vy && x < y);
                   });
  const double split = coords_[order_[mid] * dim_ + axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::squared_distance(const Vec& q, std::size_t index) const {
  double sum = 0.0;
  const double* p = &coords_[index * dim_];
  for (int a = 0; a < dim_; ++a) {
    const double diff = q(a) - p[a];
    sum += diff * diff;
  }
  return sum;
}

void KdTree::radius_search(const Vec& q, double radius, std::vector<std::size_t>& out) const {
  out.clear();
  if (count_ == 0) return;
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if (squared_distance(q, order_[i]) <= r2) out.push_back(order_[i]);
      }
      continue;
    }
    const double diff = q(node.axis) - node.split;
    if (diff <= radius) stack.push_back(node.left);
    if (diff >= -radius) stack.push_back(node.right);
  }
}

std::vector<std::pair<double, std::size_t>> KdTree::knn(const Vec& q, std::size_t k) const {
  using Entry = std::pair<double, std::size_t>;  // (squared distance, index)
  std::priority_queue<Entry> best;
  if (count_ == 0 || k == 0) return {};
  auto worst = [&] {
    return best.size() < k ? std::numeric_limits<double>::infinity() : best.top().first;
  };
  std::vector<std::pair<std::int32_t, double>> stack{{0, 0.0}};
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound > worst()) continue;
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const Entry e{squared_distance(q, order_[i]), order_[i]};
        if (best.size() < k) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
      continue;
    }
    const double diff = q(node.axis) - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    stack.push_back({far, diff * diff});
    stack.push_back({near, bound});
  }
  std::vector<Entry> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  for (auto& e : out) e.first = std::sqrt(e.first);
  return out;
}

std::size_t KdTree::nearest(const Vec& q, double* distance) const {
  require(count_ > 0, ErrorKind::kInvalidInput, "kd-tree: nearest on empty tree");
  const auto hit = knn(q, 1);
  if (distance != nullptr) *distance = hit.front().first;
  return hit.front().second;
}

}  // namespace lab
