#pragma once

#include "pcfeat/kdtree.hpp"
#include "pcfeat/point_cloud.hpp"
#include "pcfeat/types.hpp"

#include <cmath>
#include <vector>

namespace pcfeat {

template <typename Scalar>
struct EdgeParams {
  Index k = 100;
  Scalar lambda = Scalar(8);
};

template <typename Scalar>
struct EdgePointResult {
  bool is_edge = false;
  Vec3<Scalar> centroid = Vec3<Scalar>::Zero();
  Scalar shift = 0;
  Scalar resolution = 0;
};

/// Per-point output of detect_edges. For the EV baseline the same struct
/// carries the surface-variation saliency in sigma instead; shift,
/// resolution and centroid stay empty there.
template <typename Scalar>
struct EdgeLabeling {
  BoolArray is_edge;
  VecX<Scalar> shift;
  VecX<Scalar> resolution;
  PointMatrix<Scalar> centroid;
  VecX<Scalar> sigma;

  Index edge_count() const {
    Index c = 0;
    for (Index i = 0; i < is_edge.size(); ++i) {
      c += is_edge[i] ? 1 : 0;
    }
    return c;
  }

  std::vector<Index> edge_indices() const {
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(edge_count()));
    for (Index i = 0; i < is_edge.size(); ++i) {
      if (is_edge[i]) {
        idx.push_back(i);
      }
    }
    return idx;
  }
};

namespace edge_detail {

// Compensated accumulator; with k in the hundreds the neighbor sums are
// near-equal magnitudes, and downstream tests hold the recomputed mean to
// 1e-12 relative.
template <typename Scalar>
struct KahanSum {
  Scalar sum = 0;
  Scalar carry = 0;

  void add(Scalar v) {
    const Scalar y = v - carry;
    const Scalar t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace edge_detail

/// Centroid-shift edge test of a single point against its neighborhood.
/// centroid = mean of neighbors; shift = |centroid - p|; resolution =
/// distance to the closest neighbor; edge iff shift > lambda * resolution
/// (strict). A zero resolution (a duplicate of p among the neighbors) is
/// reported as-is: any positive shift then classifies as edge.
template <typename Scalar>
EdgePointResult<Scalar> edge_test(const Vec3<Scalar>& p,
                                  const PointMatrix<Scalar>& neighbors,
                                  Scalar lambda) {
  if (!(lambda > Scalar(0))) {
    throw InvalidArgument("edge threshold lambda must be > 0");
  }
  const Index m = neighbors.rows();
  if (m < 2) {
    throw InvalidArgument("edge_test needs at least 2 neighbors");
  }
  edge_detail::KahanSum<Scalar> acc[3];
  Scalar min_sq = std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < m; ++j) {
    for (int c = 0; c < 3; ++c) {
      acc[c].add(neighbors(j, c));
    }
    const Vec3<Scalar> nb = neighbors.row(j).transpose();
    min_sq = std::min(min_sq, squared_distance(nb, p));
  }
  EdgePointResult<Scalar> out;
  for (int c = 0; c < 3; ++c) {
    out.centroid[c] = acc[c].sum / static_cast<Scalar>(m);
  }
  out.shift = std::sqrt(squared_distance(out.centroid, p));
  out.resolution = std::sqrt(min_sq);
  out.is_edge = out.shift > lambda * out.resolution;
  return out;
}

/// Classifies every cloud point with edge_test over its k nearest
/// neighbors (query point excluded). Pure and sequential; results are a
/// function of (cloud, params) only.
template <typename Scalar>
EdgeLabeling<Scalar> detect_edges(const PointCloud<Scalar>& cloud,
                                  const KdTree<Scalar>& index,
                                  const EdgeParams<Scalar>& params) {
  if (params.k < 2) {
    throw InvalidArgument("edge neighborhood size k must be >= 2");
  }
  if (!(params.lambda > Scalar(0))) {
    throw InvalidArgument("edge threshold lambda must be > 0");
  }
  if (index.size() != cloud.size()) {
    throw InvalidArgument("spatial index was not built over this cloud");
  }
  const Index n = cloud.size();
  if (n < params.k + 1) {
    throw ComputeError("cloud too small: k=" + std::to_string(params.k) +
                       " needs at least k+1 points, have " + std::to_string(n));
  }

  EdgeLabeling<Scalar> out;
  out.is_edge.resize(n);
  out.shift.resize(n);
  out.resolution.resize(n);
  out.centroid.resize(n, 3);

  // Visiting points in tree order keeps consecutive queries spatially
  // adjacent, so the traversal reuses hot nodes; per-point results do not
  // depend on visit order.
  PointMatrix<Scalar> neighbors(params.k, 3);
  for (Index r = 0; r < n; ++r) {
    const Index i = index.original_index(r);
    const Vec3<Scalar> p = cloud.point(i);
    const auto nn = index.knn(p, params.k, /*exclude_self=*/true);
    for (Index j = 0; j < params.k; ++j) {
      neighbors.row(j) = cloud.points.row(nn[static_cast<std::size_t>(j)].index);
    }
    const auto res = edge_test(p, neighbors, params.lambda);
    out.is_edge[i] = res.is_edge;
    out.shift[i] = res.shift;
    out.resolution[i] = res.resolution;
    out.centroid.row(i) = res.centroid.transpose();
  }
  return out;
}

/// Number of points whose nearest other point lies within tol. Duplicate
/// points collapse the local resolution scale, so callers may want to
/// voxel-filter first when this is nonzero.
template <typename Scalar>
Index near_duplicate_count(const KdTree<Scalar>& tree, Scalar tol = Scalar(1e-12)) {
  if (tree.size() < 2) {
    return 0;
  }
  Index count = 0;
  for (Index r = 0; r < tree.size(); ++r) {
    const Vec3<Scalar> q = tree.reordered_points().row(r).transpose();
    if (tree.knn(q, 1, /*exclude_self=*/true).front().distance <= tol) {
      ++count;
    }
  }
  return count;
}

}  // namespace pcfeat
