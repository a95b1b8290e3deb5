#pragma once

#include "pcfeat/axial_kmeans.hpp"
#include "pcfeat/covariance.hpp"
#include "pcfeat/edge_detector.hpp"
#include "pcfeat/kdtree.hpp"
#include "pcfeat/point_cloud.hpp"
#include "pcfeat/types.hpp"

#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace pcfeat {

template <typename Scalar>
struct CornerParams {
  Index K = 20;
  Scalar R = 0;  // 0 resolves to 3x mean edge-point spacing
  Scalar rho = Scalar(0.005);
  Scalar epsilon = Scalar(3);
  Scalar theta1 = static_cast<Scalar>(deg_to_rad(60.0));
  Scalar theta2 = static_cast<Scalar>(deg_to_rad(130.0));
  Scalar merge_radius = 0;  // 0 resolves to 2x mean edge-point spacing
};

template <typename Scalar>
struct CurvatureField {
  PointMatrix<Scalar> vectors;      // unit direction per edge point
  PointMatrix<Scalar> eigenvalues;  // ascending triple per edge point
  BoolArray degenerate;
  BoolArray valid;                  // had >= 2 radius neighbors
  std::vector<Index> support;       // radius-neighbor count per edge point
};

template <typename Scalar>
struct ClusterStats {
  int N = 0;
  std::vector<Index> sizes;
  std::vector<Vec3<Scalar>> means;
  std::vector<Scalar> angles;  // pairwise, pairs in lexicographic order
};

template <typename Scalar>
struct MergedCorner {
  Vec3<Scalar> position;
  std::vector<Index> members;  // indices into the candidate list
};

template <typename Scalar>
struct CornerResult {
  std::vector<Index> edge_rows;              // edge-cloud row -> cloud row
  BoolArray candidate_flags;                 // per edge point
  CurvatureField<Scalar> curvature;          // per edge point
  std::vector<Vec3<Scalar>> candidates;      // positions where flag is set
  std::vector<Index> candidate_edge_rows;    // edge-cloud row per candidate
  std::vector<ClusterStats<Scalar>> stats;   // per candidate
  std::vector<MergedCorner<Scalar>> corners;
  Scalar resolved_R = 0;
  Scalar resolved_merge_radius = 0;
  Index skipped = 0;  // edge points with too few radius neighbors

  std::vector<Vec3<Scalar>> corner_positions() const {
    std::vector<Vec3<Scalar>> out;
    out.reserve(corners.size());
    for (const auto& c : corners) {
      out.push_back(c.position);
    }
    return out;
  }
};

/// Number of coordinate axes along which the neighborhood extent
/// (max - min) strictly exceeds rho. An extent-free neighborhood counts
/// as 1 (a single line), the reject verdict.
template <typename Scalar>
int cluster_count(const PointMatrix<Scalar>& neighbors, Scalar rho) {
  if (neighbors.rows() < 2) {
    throw InvalidArgument("cluster_count needs at least 2 neighbors");
  }
  if (!(rho > Scalar(0))) {
    throw InvalidArgument("cluster_count: rho must be > 0");
  }
  int n = 0;
  for (int c = 0; c < 3; ++c) {
    const Scalar extent = neighbors.col(c).maxCoeff() - neighbors.col(c).minCoeff();
    if (extent > rho) {
      ++n;
    }
  }
  return n < 1 ? 1 : n;
}

/// Pairwise angles between canonicalized cluster means via
/// atan2(|mu_i x mu_j|, mu_i . mu_j), plus the corner verdict: accepted
/// iff every pairwise size difference stays strictly below epsilon and
/// every angle falls strictly inside (theta1, theta2).
template <typename Scalar>
std::pair<bool, std::vector<Scalar>> corner_test(
    const std::vector<Index>& sizes, const std::vector<Vec3<Scalar>>& means,
    const CornerParams<Scalar>& params) {
  if (sizes.size() != means.size() || sizes.size() < 2 || sizes.size() > 3) {
    throw InvalidArgument("corner_test expects 2 or 3 clusters with matching sizes");
  }
  const std::size_t n = sizes.size();
  bool verdict = true;
  std::vector<Scalar> angles;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3<Scalar> a = canonicalize_axial(means[i]);
      const Vec3<Scalar> b = canonicalize_axial(means[j]);
      const Scalar phi = std::atan2(a.cross(b).norm(), a.dot(b));
      angles.push_back(phi);
      const Scalar size_gap = std::abs(static_cast<Scalar>(sizes[i]) -
                                       static_cast<Scalar>(sizes[j]));
      if (!(size_gap < params.epsilon)) {
        verdict = false;
      }
      if (!(phi > params.theta1 && phi < params.theta2)) {
        verdict = false;
      }
    }
  }
  return {verdict, std::move(angles)};
}

/// Single-linkage grouping of candidates under distance < merge_radius;
/// each connected component becomes one corner at the arithmetic centroid
/// of its members. Components are ordered by smallest member index.
template <typename Scalar>
std::vector<MergedCorner<Scalar>> merge_corners(
    const std::vector<Vec3<Scalar>>& candidates, Scalar merge_radius) {
  if (!(merge_radius > Scalar(0))) {
    throw InvalidArgument("merge_corners: merge_radius must be > 0");
  }
  const std::size_t n = candidates.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((candidates[i] - candidates[j]).norm() < merge_radius) {
        const std::size_t ri = find(i);
        const std::size_t rj = find(j);
        if (ri != rj) {
          parent[std::max(ri, rj)] = std::min(ri, rj);
        }
      }
    }
  }

  std::vector<MergedCorner<Scalar>> out;
  std::vector<std::ptrdiff_t> component_of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (component_of_root[root] < 0) {
      component_of_root[root] = static_cast<std::ptrdiff_t>(out.size());
      out.push_back(MergedCorner<Scalar>{Vec3<Scalar>::Zero(), {}});
    }
    out[static_cast<std::size_t>(component_of_root[root])].members.push_back(
        static_cast<Index>(i));
  }
  for (auto& corner : out) {
    Vec3<Scalar> sum = Vec3<Scalar>::Zero();
    for (const Index m : corner.members) {
      sum += candidates[static_cast<std::size_t>(m)];
    }
    corner.position = sum / static_cast<Scalar>(corner.members.size());
  }
  return out;
}

namespace corner_detail {

template <typename Scalar>
void validate(const CornerParams<Scalar>& params) {
  if (params.K < 6) {
    throw InvalidArgument("corner neighborhood size K must be >= 6");
  }
  if (params.R < Scalar(0)) {
    throw InvalidArgument("corner covariance radius R must be >= 0 (0 = auto)");
  }
  if (!(params.rho > Scalar(0))) {
    throw InvalidArgument("corner extent threshold rho must be > 0");
  }
  if (params.epsilon < Scalar(0)) {
    throw InvalidArgument("corner size slack epsilon must be >= 0");
  }
  if (!(params.theta1 >= Scalar(0) && params.theta1 < params.theta2 &&
        params.theta2 <= Scalar(kPi))) {
    throw InvalidArgument("corner angles need 0 <= theta1 < theta2 <= pi");
  }
  if (params.merge_radius < Scalar(0)) {
    throw InvalidArgument("corner merge_radius must be >= 0 (0 = auto)");
  }
}

// Removes the query point itself (the lowest-index zero-distance entry)
// from a radius result.
template <typename Scalar>
void drop_self(std::vector<Neighbor<Scalar>>& found) {
  if (!found.empty() && found.front().distance == Scalar(0)) {
    found.erase(found.begin());
  }
}

}  // namespace corner_detail

/// Corner detection restricted to the edge points of a labeling.
///
/// Builds a spatial index over the edge points, derives one curvature
/// direction per edge point from the distance-weighted covariance of its
/// R-ball (the smallest-eigenvalue eigenvector), and accepts an edge
/// point as a corner candidate when the curvature directions of its K
/// nearest edge neighbors split into 2 or 3 balanced, well-separated
/// axial clusters. Candidates within merge_radius of each other collapse
/// to their centroid.
///
/// R and merge_radius resolve from the edge cloud's mean nearest-neighbor
/// spacing (3x and 2x) when passed as 0.
template <typename Scalar>
CornerResult<Scalar> detect_corners(const PointCloud<Scalar>& cloud,
                                    const EdgeLabeling<Scalar>& edges,
                                    const CornerParams<Scalar>& params) {
  corner_detail::validate(params);
  if (edges.is_edge.size() != cloud.size()) {
    throw InvalidArgument("edge labeling does not match the cloud");
  }

  CornerResult<Scalar> out;
  out.edge_rows = edges.edge_indices();
  const Index m = static_cast<Index>(out.edge_rows.size());
  if (m < params.K + 1) {
    throw ComputeError("insufficient edge points: K=" + std::to_string(params.K) +
                       " needs at least K+1 edge points, have " + std::to_string(m));
  }

  PointMatrix<Scalar> edge_points(m, 3);
  for (Index i = 0; i < m; ++i) {
    edge_points.row(i) = cloud.points.row(out.edge_rows[static_cast<std::size_t>(i)]);
  }
  const KdTree<Scalar> tree(edge_points);

  const Scalar spacing = mean_nn_spacing(tree);
  out.resolved_R = params.R > Scalar(0) ? params.R : Scalar(3) * spacing;
  out.resolved_merge_radius =
      params.merge_radius > Scalar(0) ? params.merge_radius : Scalar(2) * spacing;
  if (!(out.resolved_R > Scalar(0)) || !(out.resolved_merge_radius > Scalar(0))) {
    throw ComputeError("degenerate edge cloud: resolved radii are zero");
  }

  // Pass 1: one curvature direction per edge point.
  auto& field = out.curvature;
  field.vectors.resize(m, 3);
  field.eigenvalues.resize(m, 3);
  field.degenerate.resize(m);
  field.valid.resize(m);
  field.support.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const Vec3<Scalar> p = edge_points.row(i).transpose();
    auto ball = tree.radius_search(p, out.resolved_R);
    corner_detail::drop_self(ball);
    field.support[static_cast<std::size_t>(i)] = static_cast<Index>(ball.size());
    if (ball.size() < 2) {
      field.vectors.row(i).setZero();
      field.eigenvalues.row(i).setZero();
      field.degenerate[i] = true;
      field.valid[i] = false;
      ++out.skipped;
      continue;
    }
    PointMatrix<Scalar> neighbors(static_cast<Index>(ball.size()), 3);
    VecX<Scalar> distances(static_cast<Index>(ball.size()));
    for (std::size_t j = 0; j < ball.size(); ++j) {
      neighbors.row(static_cast<Index>(j)) = edge_points.row(ball[j].index);
      distances[static_cast<Index>(j)] = ball[j].distance;
    }
    const auto sigma = weighted_covariance(p, neighbors, distances, out.resolved_R);
    const auto cv = curvature_vector(sigma);
    field.vectors.row(i) = cv.e.transpose();
    field.eigenvalues.row(i) = cv.eigenvalues.transpose();
    field.degenerate[i] = cv.degenerate;
    field.valid[i] = true;
  }

  // Pass 2: cluster the curvature directions of each point's K nearest
  // edge neighbors and apply the size/angle rule.
  out.candidate_flags.resize(m);
  PointMatrix<Scalar> neighbor_pos(params.K, 3);
  for (Index i = 0; i < m; ++i) {
    out.candidate_flags[i] = false;
    if (!field.valid[i]) {
      continue;
    }
    const Vec3<Scalar> p = edge_points.row(i).transpose();
    const auto nn = tree.knn(p, params.K, /*exclude_self=*/true);
    std::vector<Vec3<Scalar>> directions;
    directions.reserve(static_cast<std::size_t>(params.K));
    for (Index j = 0; j < params.K; ++j) {
      const Index nb = nn[static_cast<std::size_t>(j)].index;
      neighbor_pos.row(j) = edge_points.row(nb);
      if (field.valid[nb]) {
        directions.push_back(field.vectors.row(nb).transpose());
      }
    }
    const int n_clusters = cluster_count(neighbor_pos, params.rho);
    if (n_clusters < 2) {
      continue;
    }
    if (static_cast<int>(directions.size()) < n_clusters) {
      ++out.skipped;
      continue;
    }
    const auto clusters = kmeans_axial(directions, n_clusters);
    auto [verdict, angles] = corner_test(clusters.sizes, clusters.means, params);
    if (!verdict) {
      continue;
    }
    out.candidate_flags[i] = true;
    out.candidates.push_back(p);
    out.candidate_edge_rows.push_back(i);
    ClusterStats<Scalar> stats;
    stats.N = n_clusters;
    stats.sizes = clusters.sizes;
    stats.means = clusters.means;
    stats.angles = std::move(angles);
    out.stats.push_back(std::move(stats));
  }

  out.corners = merge_corners(out.candidates, out.resolved_merge_radius);
  return out;
}

}  // namespace pcfeat
