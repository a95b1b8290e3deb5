#pragma once

#include "pcfeat/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace pcfeat {

/// Flips an axial (sign-free) direction into canonical form: the
/// largest-magnitude component is positive, ties resolved toward the
/// earlier axis.
template <typename Scalar>
Vec3<Scalar> canonicalize_axial(const Vec3<Scalar>& v) {
  int lead = 0;
  for (int c = 1; c < 3; ++c) {
    if (std::abs(v[c]) > std::abs(v[lead])) {
      lead = c;
    }
  }
  return v[lead] < Scalar(0) ? Vec3<Scalar>(-v) : v;
}

/// Distance-weighted covariance of a neighborhood: each neighbor at
/// distance d contributes with weight (R - d) around the unweighted
/// neighbor centroid, normalized by the weight sum. Distances are the
/// caller's query distances from p; every d must be < R so weights stay
/// positive.
template <typename Scalar>
Mat3<Scalar> weighted_covariance(const Vec3<Scalar>& p,
                                 const PointMatrix<Scalar>& neighbors,
                                 const VecX<Scalar>& distances, Scalar R) {
  (void)p;
  const Index m = neighbors.rows();
  if (m < 2) {
    throw InvalidArgument("weighted_covariance needs at least 2 neighbors");
  }
  if (distances.size() != m) {
    throw InvalidArgument("weighted_covariance: one distance per neighbor required");
  }
  Scalar weight_sum = 0;
  for (Index i = 0; i < m; ++i) {
    if (!(distances[i] < R)) {
      throw InvalidArgument("weighted_covariance: neighbor distance not below R");
    }
    weight_sum += R - distances[i];
  }
  if (!(weight_sum > Scalar(0))) {
    throw ComputeError("weighted_covariance: all weights zero");
  }

  Vec3<Scalar> centroid = Vec3<Scalar>::Zero();
  for (Index i = 0; i < m; ++i) {
    centroid += neighbors.row(i).transpose();
  }
  centroid /= static_cast<Scalar>(m);

  // Accumulate the upper triangle and mirror it, so the result is
  // symmetric to the bit.
  Scalar xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
  for (Index i = 0; i < m; ++i) {
    const Scalar w = R - distances[i];
    const Scalar dx = neighbors(i, 0) - centroid[0];
    const Scalar dy = neighbors(i, 1) - centroid[1];
    const Scalar dz = neighbors(i, 2) - centroid[2];
    xx += w * dx * dx;
    xy += w * dx * dy;
    xz += w * dx * dz;
    yy += w * dy * dy;
    yz += w * dy * dz;
    zz += w * dz * dz;
  }
  Mat3<Scalar> sigma;
  sigma << xx, xy, xz, xy, yy, yz, xz, yz, zz;
  sigma /= weight_sum;
  return sigma;
}

template <typename Scalar>
struct CurvatureVectorResult {
  Vec3<Scalar> e = Vec3<Scalar>::Zero();
  Vec3<Scalar> eigenvalues = Vec3<Scalar>::Zero();  // ascending
  bool degenerate = false;
};

/// Unit eigenvector of the smallest eigenvalue, sign-canonicalized.
/// Degenerate when the two smallest eigenvalues are within tolerance of
/// each other, in which case the returned direction is whichever the
/// solver picked for the (ill-defined) smallest eigenspace.
template <typename Scalar>
CurvatureVectorResult<Scalar> curvature_vector(const Mat3<Scalar>& sigma) {
  for (int r = 0; r < 3; ++r) {
    for (int c = r + 1; c < 3; ++c) {
      if (std::abs(sigma(r, c) - sigma(c, r)) > Scalar(1e-9)) {
        throw InvalidArgument("curvature_vector: matrix is not symmetric");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> solver(sigma);
  if (solver.info() != Eigen::Success) {
    throw ComputeError("curvature_vector: eigendecomposition failed");
  }
  CurvatureVectorResult<Scalar> out;
  out.eigenvalues = solver.eigenvalues();
  Vec3<Scalar> e = solver.eigenvectors().col(0);
  e.normalize();
  out.e = canonicalize_axial(e);
  const Scalar scale = std::max(out.eigenvalues[2], Scalar(1e-30));
  out.degenerate = (out.eigenvalues[1] - out.eigenvalues[0]) <= Scalar(1e-9) * scale;
  return out;
}

}  // namespace pcfeat
