#pragma once

#include "pcfeat/covariance.hpp"
#include "pcfeat/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pcfeat {

/// Squared distance between axial unit vectors: the closer of v to mu and
/// v to -mu.
template <typename Scalar>
Scalar axial_distance_sq(const Vec3<Scalar>& v, const Vec3<Scalar>& mu) {
  const Scalar dminus = (v - mu).squaredNorm();
  const Scalar dplus = (v + mu).squaredNorm();
  return std::min(dminus, dplus);
}

template <typename Scalar>
struct AxialKMeansResult {
  std::vector<int> assignment;            // per input vector, 0..N-1
  std::vector<Index> sizes;               // per cluster
  std::vector<Vec3<Scalar>> means;        // unit, canonicalized
  std::vector<Scalar> objective_history;  // after each iteration's update
  int iterations = 0;
};

namespace kmeans_detail {

template <typename Scalar>
Scalar objective(const std::vector<Vec3<Scalar>>& vectors,
                 const std::vector<int>& assignment,
                 const std::vector<Vec3<Scalar>>& means) {
  Scalar total = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    total += axial_distance_sq(vectors[i], means[static_cast<std::size_t>(assignment[i])]);
  }
  return total;
}

}  // namespace kmeans_detail

/// Lloyd k-means over axial unit vectors (v and -v are the same
/// direction).
///
/// Initialization is deterministic farthest-point seeding: the first
/// vector seeds cluster 0, then each further seed is the vector with the
/// largest minimum axial distance to the seeds chosen so far (ties to the
/// lowest index). Each iteration assigns vectors to the axially nearest
/// mean (ties to the lowest cluster), repairs any empty cluster by
/// stealing the vector farthest from its own mean, then recomputes each
/// mean as the normalized sum of members flipped toward the old mean.
/// Terminates when the post-repair assignment repeats or after 50
/// iterations. The recorded objective never increases across iterations.
template <typename Scalar>
AxialKMeansResult<Scalar> kmeans_axial(const std::vector<Vec3<Scalar>>& input,
                                       int n_clusters) {
  if (n_clusters < 2) {
    throw InvalidArgument("kmeans_axial needs at least 2 clusters");
  }
  if (static_cast<int>(input.size()) < n_clusters) {
    throw InvalidArgument("kmeans_axial: fewer vectors than clusters");
  }
  const std::size_t n = input.size();
  const std::size_t nc = static_cast<std::size_t>(n_clusters);

  std::vector<Vec3<Scalar>> vectors(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar norm = input[i].norm();
    vectors[i] = norm > Scalar(0) ? Vec3<Scalar>(input[i] / norm) : input[i];
  }

  // Farthest-point seeding.
  std::vector<Vec3<Scalar>> means;
  means.reserve(nc);
  means.push_back(vectors[0]);
  while (means.size() < nc) {
    std::size_t best = 0;
    Scalar best_dist = -1;
    for (std::size_t i = 0; i < n; ++i) {
      Scalar nearest = std::numeric_limits<Scalar>::infinity();
      for (const auto& s : means) {
        nearest = std::min(nearest, axial_distance_sq(vectors[i], s));
      }
      if (nearest > best_dist) {
        best_dist = nearest;
        best = i;
      }
    }
    means.push_back(vectors[best]);
  }

  AxialKMeansResult<Scalar> out;
  out.assignment.assign(n, 0);
  std::vector<int> previous;
  std::vector<Vec3<Scalar>> previous_means;

  for (int iter = 0; iter < 50; ++iter) {
    // Assignment: axially nearest mean, ties to the lower cluster index.
    for (std::size_t i = 0; i < n; ++i) {
      int best_cluster = 0;
      Scalar best_dist = axial_distance_sq(vectors[i], means[0]);
      for (std::size_t c = 1; c < nc; ++c) {
        const Scalar d = axial_distance_sq(vectors[i], means[c]);
        if (d < best_dist) {
          best_dist = d;
          best_cluster = static_cast<int>(c);
        }
      }
      out.assignment[i] = best_cluster;
    }

    // Repair empty clusters: move in the vector farthest from its own
    // mean, taken only from clusters that can spare one.
    std::vector<Index> sizes(nc, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[static_cast<std::size_t>(out.assignment[i])];
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (sizes[c] != 0) {
        continue;
      }
      std::size_t worst = n;
      Scalar worst_dist = -1;
      for (std::size_t i = 0; i < n; ++i) {
        const auto home = static_cast<std::size_t>(out.assignment[i]);
        if (sizes[home] < 2) {
          continue;
        }
        const Scalar d = axial_distance_sq(vectors[i], means[home]);
        if (d > worst_dist) {
          worst_dist = d;
          worst = i;
        }
      }
      if (worst == n) {
        continue;  // unreachable: n >= n_clusters forces a donor
      }
      --sizes[static_cast<std::size_t>(out.assignment[worst])];
      out.assignment[worst] = static_cast<int>(c);
      sizes[c] = 1;
    }

    // Mean update: flip members toward the old mean, average, normalize.
    for (std::size_t c = 0; c < nc; ++c) {
      Vec3<Scalar> sum = Vec3<Scalar>::Zero();
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(out.assignment[i]) != c) {
          continue;
        }
        const Scalar dot = vectors[i].dot(means[c]);
        sum += dot < Scalar(0) ? Vec3<Scalar>(-vectors[i]) : vectors[i];
      }
      const Scalar norm = sum.norm();
      if (norm > Scalar(0)) {
        means[c] = sum / norm;
      }
    }

    out.iterations = iter + 1;
    out.objective_history.push_back(
        kmeans_detail::objective(vectors, out.assignment, means));
    // A repeat of both assignment and means is a fixed point: every vector
    // is then provably nearest its own cluster under the final means.
    const bool means_stable =
        previous_means.size() == means.size() &&
        [&] {
          for (std::size_t c = 0; c < means.size(); ++c) {
            if ((means[c].array() != previous_means[c].array()).any()) {
              return false;
            }
          }
          return true;
        }();
    if (out.assignment == previous && means_stable) {
      break;
    }
    previous = out.assignment;
    previous_means = means;
  }

  out.sizes.assign(nc, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++out.sizes[static_cast<std::size_t>(out.assignment[i])];
  }
  out.means.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    out.means[c] = canonicalize_axial(means[c]);
  }
  return out;
}

}  // namespace pcfeat
