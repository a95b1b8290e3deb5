#pragma once

#include "pcfeat/point_cloud.hpp"
#include "pcfeat/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace pcfeat {

template <typename Scalar>
struct Neighbor {
  Index index;
  Scalar distance;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

template <typename Scalar>
inline Scalar squared_distance(const Vec3<Scalar>& a, const Vec3<Scalar>& b) {
  const Scalar dx = a[0] - b[0];
  const Scalar dy = a[1] - b[1];
  const Scalar dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

/// Exact k-d tree over a fixed set of points.
///
/// Queries return exactly what a brute-force scan over the same points
/// would, including tie order: results ascend by (distance, index), and
/// radius_search keeps strictly d < R. Exactness holds because leaves
/// evaluate the same distance expression a scan would and subtree pruning
/// only discards regions whose best possible distance exceeds the current
/// worst by a safety margin.
template <typename Scalar>
class KdTree {
 public:
  explicit KdTree(const PointMatrix<Scalar>& points) {
    const Index n = points.rows();
    if (n == 0) {
      throw ComputeError("cannot build a spatial index over an empty cloud");
    }
    to_original_.resize(static_cast<std::size_t>(n));
    std::iota(to_original_.begin(), to_original_.end(), Index{0});
    nodes_.reserve(static_cast<std::size_t>(2 * (n / kLeafSize + 2)));
    build(points, 0, n);
    pts_.resize(n, 3);
    for (Index r = 0; r < n; ++r) {
      pts_.row(r) = points.row(to_original_[static_cast<std::size_t>(r)]);
    }
  }

  Index size() const { return pts_.rows(); }

  /// Points in tree order; row r holds the point whose original index is
  /// original_index(r).
  const PointMatrix<Scalar>& reordered_points() const { return pts_; }

  Index original_index(Index r) const {
    return to_original_[static_cast<std::size_t>(r)];
  }

  /// The k nearest points to query, ascending by (distance, index).
  /// With exclude_self, one zero-distance point (the lowest-index one) is
  /// dropped before truncating to k, so a query placed on a cloud point
  /// gets k genuine neighbors.
  std::vector<Neighbor<Scalar>> knn(const Vec3<Scalar>& query, Index k,
                                    bool exclude_self = false) const {
    if (k < 1) {
      throw InvalidArgument("knn requires k >= 1");
    }
    if (size() < k) {
      throw ComputeError("knn: k exceeds available points");
    }
    const Index capacity = exclude_self ? std::min(k + 1, size()) : k;
    std::vector<Neighbor<Scalar>> heap;
    heap.reserve(static_cast<std::size_t>(capacity));
    search_knn(query, 0, capacity, heap);
    std::sort(heap.begin(), heap.end(), better_neighbor);
    if (exclude_self && heap.front().distance == Scalar(0)) {
      heap.erase(heap.begin());
    }
    if (static_cast<Index>(heap.size()) > k) {
      heap.resize(static_cast<std::size_t>(k));
    }
    if (static_cast<Index>(heap.size()) < k) {
      throw ComputeError("knn: k exceeds available points after excluding the query point");
    }
    return heap;
  }

  /// All points with distance strictly below radius, ascending by
  /// (distance, index).
  std::vector<Neighbor<Scalar>> radius_search(const Vec3<Scalar>& query,
                                              Scalar radius) const {
    if (!(radius > Scalar(0))) {
      throw InvalidArgument("radius_search requires R > 0");
    }
    std::vector<Neighbor<Scalar>> found;
    search_radius(query, 0, radius, found);
    std::sort(found.begin(), found.end(), better_neighbor);
    return found;
  }

 private:
  struct Node {
    Scalar split;
    std::int32_t axis;  // -1 marks a leaf
    Index a;            // left child, or first leaf row
    Index b;            // right child, or one-past-last leaf row
  };

  static constexpr Index kLeafSize = 16;

  // Pruning bounds get this much relative headroom so rounding in the
  // per-point distance expression can never hide a point the scan would
  // have kept.
  static Scalar prune_slack() {
    return Scalar(1) + Scalar(4096) * std::numeric_limits<Scalar>::epsilon();
  }

  static bool better_neighbor(const Neighbor<Scalar>& x, const Neighbor<Scalar>& y) {
    return x.distance < y.distance ||
           (x.distance == y.distance && x.index < y.index);
  }

  Index build(const PointMatrix<Scalar>& points, Index begin, Index end) {
    const Index id = static_cast<Index>(nodes_.size());
    nodes_.push_back(Node{});
    if (end - begin <= kLeafSize) {
      nodes_[static_cast<std::size_t>(id)] = Node{Scalar(0), -1, begin, end};
      return id;
    }
    Vec3<Scalar> lo = points.row(to_original_[static_cast<std::size_t>(begin)]);
    Vec3<Scalar> hi = lo;
    for (Index r = begin + 1; r < end; ++r) {
      const auto row = points.row(to_original_[static_cast<std::size_t>(r)]);
      for (int c = 0; c < 3; ++c) {
        lo[c] = std::min(lo[c], row[c]);
        hi[c] = std::max(hi[c], row[c]);
      }
    }
    int axis = 0;
    for (int c = 1; c < 3; ++c) {
      if (hi[c] - lo[c] > hi[axis] - lo[axis]) {
        axis = c;
      }
    }
    const Index mid = begin + (end - begin) / 2;
    std::nth_element(to_original_.begin() + begin, to_original_.begin() + mid,
                     to_original_.begin() + end, [&](Index x, Index y) {
                       return points(x, axis) < points(y, axis);
                     });
    const Scalar split = points(to_original_[static_cast<std::size_t>(mid)], axis);
    const Index left = build(points, begin, mid);
    const Index right = build(points, mid, end);
    nodes_[static_cast<std::size_t>(id)] =
        Node{split, static_cast<std::int32_t>(axis), left, right};
    return id;
  }

  Scalar point_distance(Index row, const Vec3<Scalar>& query) const {
    const Scalar dx = pts_(row, 0) - query[0];
    const Scalar dy = pts_(row, 1) - query[1];
    const Scalar dz = pts_(row, 2) - query[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }

  void search_knn(const Vec3<Scalar>& query, Index node_id, Index capacity,
                  std::vector<Neighbor<Scalar>>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.axis < 0) {
      for (Index r = node.a; r < node.b; ++r) {
        const Scalar dx = pts_(r, 0) - query[0];
        const Scalar dy = pts_(r, 1) - query[1];
        const Scalar dz = pts_(r, 2) - query[2];
        const Scalar sq = dx * dx + dy * dy + dz * dz;
        if (static_cast<Index>(heap.size()) == capacity) {
          // Cheap reject: beyond this bound the rounded root is strictly
          // worse than the current worst, so the exact comparison below
          // could never admit the point anyway.
          const Scalar worst = heap.front().distance;
          if (sq > worst * worst * prune_slack()) {
            continue;
          }
        }
        const Neighbor<Scalar> cand{original_index(r), std::sqrt(sq)};
        if (static_cast<Index>(heap.size()) < capacity) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), better_neighbor);
        } else if (better_neighbor(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), better_neighbor);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), better_neighbor);
        }
      }
      return;
    }
    const Scalar diff = query[node.axis] - node.split;
    const Index near = diff < Scalar(0) ? node.a : node.b;
    const Index far = diff < Scalar(0) ? node.b : node.a;
    search_knn(query, near, capacity, heap);
    if (static_cast<Index>(heap.size()) < capacity) {
      search_knn(query, far, capacity, heap);
    } else {
      const Scalar worst = heap.front().distance;
      if (diff * diff <= worst * worst * prune_slack()) {
        search_knn(query, far, capacity, heap);
      }
    }
  }

  void search_radius(const Vec3<Scalar>& query, Index node_id, Scalar radius,
                     std::vector<Neighbor<Scalar>>& found) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.axis < 0) {
      for (Index r = node.a; r < node.b; ++r) {
        const Scalar d = point_distance(r, query);
        if (d < radius) {
          found.push_back(Neighbor<Scalar>{original_index(r), d});
        }
      }
      return;
    }
    const Scalar diff = query[node.axis] - node.split;
    const Index near = diff < Scalar(0) ? node.a : node.b;
    const Index far = diff < Scalar(0) ? node.b : node.a;
    search_radius(query, near, radius, found);
    if (diff * diff <= radius * radius * prune_slack()) {
      search_radius(query, far, radius, found);
    }
  }

  PointMatrix<Scalar> pts_;
  std::vector<Index> to_original_;
  std::vector<Node> nodes_;
};

template <typename Scalar>
KdTree<Scalar> build_index(const PointCloud<Scalar>& cloud) {
  return KdTree<Scalar>(cloud.points);
}

/// Mean distance from each point to its nearest other point. Density
/// proxy used to resolve radius-like defaults.
template <typename Scalar>
Scalar mean_nn_spacing(const KdTree<Scalar>& tree) {
  const Index n = tree.size();
  if (n < 2) {
    throw ComputeError("mean_nn_spacing needs at least 2 points");
  }
  Scalar sum = 0;
  for (Index r = 0; r < n; ++r) {
    const Vec3<Scalar> q = tree.reordered_points().row(r).transpose();
    sum += tree.knn(q, 1, /*exclude_self=*/true).front().distance;
  }
  return sum / static_cast<Scalar>(n);
}

}  // namespace pcfeat
