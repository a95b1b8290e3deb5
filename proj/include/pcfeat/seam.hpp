#pragma once

#include "pcfeat/kdtree.hpp"
#include "pcfeat/types.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace pcfeat {

template <typename Scalar>
struct SeamParams {
  Scalar delta = 0;  // 0 resolves to 2x mean edge-point spacing
  Index bins = 20;
  Scalar gamma = Scalar(0.7);
};

template <typename Scalar>
struct SeamSegment {
  Index a = 0;  // corner indices into the input corner list, a < b
  Index b = 0;
  Vec3<Scalar> endpoint_a = Vec3<Scalar>::Zero();
  Vec3<Scalar> endpoint_b = Vec3<Scalar>::Zero();
  Scalar coverage = 0;
  Index support_count = 0;
};

template <typename Scalar>
struct SeamSupport {
  Scalar coverage = 0;
  Index support_count = 0;
};

template <typename Scalar>
struct SeamExtraction {
  std::vector<SeamSegment<Scalar>> segments;
  Scalar resolved_delta = 0;
};

namespace seam_detail {

template <typename Scalar>
void validate_bins_delta(Index bins, Scalar delta) {
  if (bins < 2) {
    throw InvalidArgument("seam bins must be >= 2");
  }
  if (!(delta > Scalar(0))) {
    throw InvalidArgument("seam support radius delta must be > 0");
  }
}

}  // namespace seam_detail

/// Fraction of the segment's bins that contain at least one edge point,
/// along with how many edge points support the segment at all. An edge
/// point supports bin j when its projection parameter t lies in [0,1],
/// falls into bin j, and its perpendicular distance to the line is at
/// most delta.
template <typename Scalar>
SeamSupport<Scalar> segment_support(const Vec3<Scalar>& a, const Vec3<Scalar>& b,
                                    const PointMatrix<Scalar>& edge_points,
                                    const SeamParams<Scalar>& params) {
  seam_detail::validate_bins_delta(params.bins, params.delta);
  const Vec3<Scalar> axis = b - a;
  const Scalar len_sq = axis.squaredNorm();
  if (!(len_sq > Scalar(0))) {
    throw InvalidArgument("segment_support: degenerate segment (a equals b)");
  }

  std::vector<char> occupied(static_cast<std::size_t>(params.bins), 0);
  Index support_count = 0;
  for (Index i = 0; i < edge_points.rows(); ++i) {
    const Vec3<Scalar> q = edge_points.row(i).transpose();
    const Scalar t = (q - a).dot(axis) / len_sq;
    if (t < Scalar(0) || t > Scalar(1)) {
      continue;
    }
    const Vec3<Scalar> foot = a + t * axis;
    const Scalar perp = (q - foot).norm();
    if (perp > params.delta) {
      continue;
    }
    Index bin = static_cast<Index>(std::floor(t * static_cast<Scalar>(params.bins)));
    bin = std::min(bin, params.bins - 1);  // t == 1 lands in the last bin
    occupied[static_cast<std::size_t>(bin)] = 1;
    ++support_count;
  }

  Index filled = 0;
  for (const char o : occupied) {
    filled += o;
  }
  SeamSupport<Scalar> out;
  out.coverage =
      static_cast<Scalar>(filled) / static_cast<Scalar>(params.bins);
  out.support_count = support_count;
  return out;
}

/// Builds straight seams between corner pairs. A pair becomes a seam when
/// enough of its bins are supported by edge points (coverage >= gamma)
/// and no third corner sits within delta of the segment's interior (which
/// would make it a chord spanning a collinear run of corners). Output is
/// sorted by descending coverage, ties by ascending index pair. Fewer
/// than 2 corners yield no seams. delta = 0 resolves to 2x the mean
/// nearest-neighbor spacing of the edge points.
template <typename Scalar>
SeamExtraction<Scalar> extract_seams(const std::vector<Vec3<Scalar>>& corners,
                                     const PointMatrix<Scalar>& edge_points,
                                     const SeamParams<Scalar>& params) {
  if (!(params.gamma > Scalar(0) && params.gamma <= Scalar(1))) {
    throw InvalidArgument("seam coverage gamma must be in (0, 1]");
  }
  if (params.delta < Scalar(0)) {
    throw InvalidArgument("seam support radius delta must be >= 0 (0 = auto)");
  }

  SeamExtraction<Scalar> out;
  SeamParams<Scalar> resolved = params;
  if (resolved.delta == Scalar(0)) {
    const KdTree<Scalar> tree(edge_points);  // throws on an empty edge set
    resolved.delta = Scalar(2) * mean_nn_spacing(tree);
  }
  seam_detail::validate_bins_delta(resolved.bins, resolved.delta);
  out.resolved_delta = resolved.delta;

  const Index nc = static_cast<Index>(corners.size());
  for (Index i = 0; i < nc; ++i) {
    for (Index j = i + 1; j < nc; ++j) {
      const Vec3<Scalar>& a = corners[static_cast<std::size_t>(i)];
      const Vec3<Scalar>& b = corners[static_cast<std::size_t>(j)];
      const Vec3<Scalar> axis = b - a;
      const Scalar len_sq = axis.squaredNorm();
      if (!(len_sq > Scalar(0))) {
        continue;  // coincident corners cannot form a seam
      }

      bool spans_another_corner = false;
      for (Index c = 0; c < nc; ++c) {
        if (c == i || c == j) {
          continue;
        }
        const Vec3<Scalar>& m = corners[static_cast<std::size_t>(c)];
        const Scalar t = (m - a).dot(axis) / len_sq;
        if (!(t > Scalar(0) && t < Scalar(1))) {
          continue;
        }
        const Vec3<Scalar> foot = a + t * axis;
        if ((m - foot).norm() <= resolved.delta) {
          spans_another_corner = true;
          break;
        }
      }
      if (spans_another_corner) {
        continue;
      }

      const auto support = segment_support(a, b, edge_points, resolved);
      if (support.coverage < resolved.gamma) {
        continue;
      }
      SeamSegment<Scalar> seg;
      seg.a = i;
      seg.b = j;
      seg.endpoint_a = a;
      seg.endpoint_b = b;
      seg.coverage = support.coverage;
      seg.support_count = support.support_count;
      out.segments.push_back(seg);
    }
  }

  std::sort(out.segments.begin(), out.segments.end(),
            [](const SeamSegment<Scalar>& x, const SeamSegment<Scalar>& y) {
              if (x.coverage != y.coverage) {
                return x.coverage > y.coverage;
              }
              return std::pair(x.a, x.b) < std::pair(y.a, y.b);
            });
  return out;
}

}  // namespace pcfeat
