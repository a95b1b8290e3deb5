#pragma once

#include "pcfeat/point_cloud.hpp"
#include "pcfeat/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace pcfeat {

template <typename Scalar>
struct VoxelSpec {
  Scalar leaf{};
};

/// One output point per occupied voxel, at the centroid of the voxel's
/// points. Output order is ascending lexicographic voxel coordinate
/// (x, then y, then z). Colors do not survive downsampling. The voxel of
/// a point is floor(coordinate / leaf) per axis.
template <typename Scalar>
PointCloud<Scalar> voxel_downsample(const PointCloud<Scalar>& cloud,
                                    const VoxelSpec<Scalar>& spec) {
  if (!(spec.leaf > Scalar(0))) {
    throw InvalidArgument("voxel leaf size must be > 0");
  }
  const Index n = cloud.size();
  PointCloud<Scalar> out;
  if (n == 0) {
    out.points.resize(0, 3);
    return out;
  }

  struct Entry {
    std::array<std::int64_t, 3> voxel;
    Index row;
  };
  std::vector<Entry> entries(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      entries[static_cast<std::size_t>(i)].voxel[static_cast<std::size_t>(c)] =
          static_cast<std::int64_t>(std::floor(cloud.points(i, c) / spec.leaf));
    }
    entries[static_cast<std::size_t>(i)].row = i;
  }
  // Stable sort keeps input order inside each voxel, so centroid summation
  // order (and the result bits) do not depend on the sort implementation.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.voxel < b.voxel; });

  std::vector<Vec3<Scalar>> centroids;
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    Vec3<Scalar> sum = Vec3<Scalar>::Zero();
    while (j < entries.size() && entries[j].voxel == entries[i].voxel) {
      sum += cloud.points.row(entries[j].row).transpose();
      ++j;
    }
    centroids.push_back(sum / static_cast<Scalar>(j - i));
    i = j;
  }

  out.points.resize(static_cast<Index>(centroids.size()), 3);
  for (std::size_t r = 0; r < centroids.size(); ++r) {
    out.points.row(static_cast<Index>(r)) = centroids[r].transpose();
  }
  return out;
}

}  // namespace pcfeat
