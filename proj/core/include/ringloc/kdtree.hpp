#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ringloc/types.hpp"

namespace ringloc {

/// Exact nearest-neighbour index over a fixed 3D point set.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double dist2 = 0.0;
  };

  explicit KdTree(std::span<const Point3> points);

  std::size_t size() const noexcept { return points_.size(); }

  /// Nearest point within max_dist (inclusive), if any.
  std::optional<Neighbor> nearest(const Point3& query,
                                  double max_dist = std::numeric_limits<double>::infinity()) const;

  /// The k nearest points in ascending distance (fewer if the set is smaller).
  std::vector<Neighbor> knn(const Point3& query, std::size_t k) const;

 private:
  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t begin = 0;
    std::size_t end = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::size_t begin, std::size_t end);
  template <typename Visitor>
  void search(int node, const Point3& q, Visitor& visit, double& bound2) const;

  std::vector<Point3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace ringloc
