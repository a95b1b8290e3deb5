#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pcfeat {

using Index = Eigen::Index;

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// N x 3 row-major matrix of 3D points, one point per row.
template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// N x 3 row-major matrix of 8-bit RGB colors.
using ColorMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

inline constexpr double kPi = 3.14159265358979323846;

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) {
  return deg * Scalar(kPi) / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / Scalar(kPi);
}

// Error taxonomy. The CLI maps these onto its exit codes: IoError -> 2,
// ComputeError -> 3, InvalidArgument and everything else user-facing -> 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable, unwritable or malformed files.
struct IoError : Error {
  using Error::Error;
};

/// Parameter outside its documented domain.
struct InvalidArgument : Error {
  using Error::Error;
};

/// Input data insufficient for the requested computation.
struct ComputeError : Error {
  using Error::Error;
};

}  // namespace pcfeat
