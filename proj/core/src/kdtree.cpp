#include "ringloc/kdtree.hpp"

#include <algorithm>
#include <queue>

namespace ringloc {
namespace {
constexpr std::size_t kLeafSize = 8;
}

KdTree::KdTree(std::span<const Point3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) build(0, points_.size());
}

int KdTree::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <typename Visitor>
void KdTree::search(int node_id, const Point3& q, Visitor& visit, double& bound2) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      visit(idx, (points_[idx] - q).squaredNorm());
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, q, visit, bound2);
  if (diff * diff <= bound2) search(far, q, visit, bound2);
}

std::optional<KdTree::Neighbor> KdTree::nearest(const Point3& query, double max_dist) const {
  if (points_.empty()) return std::nullopt;
  double bound2 = max_dist * max_dist;
  std::optional<Neighbor> best;
  auto visit = [&](std::size_t idx, double d2) {
    if (d2 > bound2) return;
    // Ties resolve to the lower index so results do not depend on tree layout.
    if (!best || d2 < best->dist2 || (d2 == best->dist2 && idx < best->index)) {
      best = Neighbor{idx, d2};
      bound2 = d2;
    }
  };
  search(0, query, visit, bound2);
  return best;
}

std::vector<KdTree::Neighbor> KdTree::knn(const Point3& query, std::size_t k) const {
  std::vector<Neighbor> out;
  if (points_.empty() || k == 0) return out;
  auto cmp = [](const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  };
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(cmp)> heap(cmp);
  double bound2 = std::numeric_limits<double>::infinity();
  auto visit = [&](std::size_t idx, double d2) {
    const Neighbor n{idx, d2};
    if (heap.size() < k) {
      heap.push(n);
    } else if (cmp(n, heap.top())) {
      heap.pop();
      heap.push(n);
    }
    if (heap.size() == k) bound2 = heap.top().dist2;
  };
  search(0, query, visit, bound2);
  out.resize(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

}  // namespace ringloc
