#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "labyrinth/types.hpp"

namespace lab {

/// Static k-d tree over points of a common dimension.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const std::vector<Vec>& points);

  std::size_t size() const { return count_; }
  int dim() const { return dim_; }

  /// Indices with |p - q| <= radius, in unspecified order.
  void radius_search(const Vec& q, double radius, std::vector<std::size_t>& out) const;

  /// The k nearest points as (distance, index), closest first; ties by index.
  std::vector<std::pair<double, std::size_t>> knn(const Vec& q, std::size_t k) const;

  std::size_t nearest(const Vec& q, double* distance = nullptr) const;

 private:
  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  double squared_distance(const Vec& q, std::size_t index) const;

  int dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> coords_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace lab
