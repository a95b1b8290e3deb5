#pragma once

#include "pcfeat/types.hpp"

namespace pcfeat {

/// Unorganized point cloud. Colors are optional; an empty color matrix
/// (0 rows) means "no colors". When present, colors has the same row
/// count as points.
template <typename Scalar>
struct PointCloud {
  PointMatrix<Scalar> points;
  ColorMatrix colors;

  Index size() const { return points.rows(); }
  bool has_colors() const { return colors.rows() > 0; }

  Vec3<Scalar> point(Index i) const { return points.row(i).transpose(); }
};

}  // namespace pcfeat
