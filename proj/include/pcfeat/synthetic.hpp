#pragma once

#include "pcfeat/io.hpp"
#include "pcfeat/point_cloud.hpp"
#include "pcfeat/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pcfeat {

enum class ShapeKind { plane, cube, lbracket, panel };

template <typename Scalar>
struct ShapeSpec {
  ShapeKind kind = ShapeKind::cube;
  Scalar size = Scalar(0.1);
  Scalar spacing = Scalar(0.002);
  Scalar noise_sigma = 0;
  std::uint64_t seed = 1;
};

enum class TruthSource { synthetic, file };

/// Analytic reference positions for scoring detectors. Edge truth includes
/// corner positions (a corner always lies on an edge line); corner truth is
/// the corner positions alone. Positions are noise-free even when the
/// generated cloud is noisy.
template <typename Scalar>
struct GroundTruth {
  PointMatrix<Scalar> edge_points{0, 3};
  PointMatrix<Scalar> corner_points{0, 3};
  TruthSource source = TruthSource::synthetic;
};

template <typename Scalar>
struct SyntheticShape {
  PointCloud<Scalar> cloud;
  std::vector<PointLabel> labels;  // one class per cloud row, set before noise
  GroundTruth<Scalar> truth;
};

template <typename Scalar>
GroundTruth<Scalar> truth_from_labels(const PointMatrix<Scalar>& points,
                                      const std::vector<PointLabel>& labels,
                                      TruthSource source) {
  if (static_cast<Index>(labels.size()) != points.rows()) {
    throw InvalidArgument("label count does not match point count");
  }
  Index edges = 0;
  Index corners = 0;
  for (const PointLabel l : labels) {
    if (l != PointLabel::plain) {
      ++edges;
    }
    if (l == PointLabel::corner) {
      ++corners;
    }
  }
  GroundTruth<Scalar> truth;
  truth.source = source;
  truth.edge_points.resize(edges, 3);
  truth.corner_points.resize(corners, 3);
  Index e = 0;
  Index c = 0;
  for (Index i = 0; i < points.rows(); ++i) {
    const PointLabel l = labels[static_cast<std::size_t>(i)];
    if (l != PointLabel::plain) {
      truth.edge_points.row(e++) = points.row(i);
    }
    if (l == PointLabel::corner) {
      truth.corner_points.row(c++) = points.row(i);
    }
  }
  return truth;
}

namespace synth_detail {

/// Portable Gaussian draws: Box-Muller over mt19937_64 so that a seed
/// produces the same cloud on every platform (std::normal_distribution is
/// implementation-defined).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = unit_open();
    const double u2 = unit_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  double unit_open() {
    // 53 random bits mapped to (0, 1]; never 0, so log() is safe
    return static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0;
};

template <typename Scalar>
Scalar point_segment_distance(const Vec3<Scalar>& q, const Vec3<Scalar>& a,
                              const Vec3<Scalar>& b) {
  const Vec3<Scalar> axis = b - a;
  const Scalar len_sq = axis.squaredNorm();
  Scalar t = len_sq > Scalar(0) ? (q - a).dot(axis) / len_sq : Scalar(0);
  t = std::min(Scalar(1), std::max(Scalar(0), t));
  return (q - (a + t * axis)).norm();
}

/// m+1 lattice values spanning [lo, hi] with both ends exact.
template <typename Scalar>
std::vector<Scalar> lattice(Scalar lo, Scalar hi, Index m) {
  std::vector<Scalar> v(static_cast<std::size_t>(m) + 1);
  const Scalar h = (hi - lo) / static_cast<Scalar>(m);
  for (Index i = 0; i <= m; ++i) {
    v[static_cast<std::size_t>(i)] = lo + h * static_cast<Scalar>(i);
  }
  v.front() = lo;
  v.back() = hi;
  return v;
}

template <typename Scalar>
struct Builder {
  std::vector<Vec3<Scalar>> points;
  std::vector<PointLabel> labels;

  void add(Scalar x, Scalar y, Scalar z, PointLabel label) {
    points.emplace_back(x, y, z);
    labels.push_back(label);
  }
};

}  // namespace synth_detail

/// Generates a labeled sample of one of the reference shapes. Per-point
/// labels and the analytic truth sets are assigned on the clean geometry;
/// Gaussian coordinate noise (if any) is applied afterwards to the cloud
/// only. Deterministic for a fixed spec.
template <typename Scalar>
SyntheticShape<Scalar> synth_shape(const ShapeSpec<Scalar>& spec) {
  using synth_detail::Builder;
  using synth_detail::lattice;
  using synth_detail::point_segment_distance;

  if (!(spec.size > Scalar(0))) {
    throw InvalidArgument("shape size must be > 0");
  }
  if (!(spec.spacing > Scalar(0))) {
    throw InvalidArgument("shape spacing must be > 0");
  }
  if (!(spec.noise_sigma >= Scalar(0))) {
    throw InvalidArgument("noise sigma must be >= 0");
  }

  const Scalar s = spec.size;
  const Scalar half = s / Scalar(2);
  const Index m = std::max<Index>(
      1, static_cast<Index>(std::llround(static_cast<double>(s / spec.spacing))));
  const Scalar h = s / static_cast<Scalar>(m);  // effective lattice step
  const Scalar band = Scalar(1.5) * h;          // edge label band around creases

  Builder<Scalar> b;

  switch (spec.kind) {
    case ShapeKind::plane: {
      // Centered square grid on z = 0; the boundary ring is the edge truth.
      const auto v = lattice(-half, half, m);
      for (Index i = 0; i <= m; ++i) {
        for (Index j = 0; j <= m; ++j) {
          const bool ring = i == 0 || i == m || j == 0 || j == m;
          b.add(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)],
                Scalar(0), ring ? PointLabel::edge : PointLabel::plain);
        }
      }
      break;
    }
    case ShapeKind::cube: {
      // Surface lattice of a cube centered at the origin. Creases are the 12
      // cube edges; lattice points within 1.5 steps of one are labeled edge,
      // the 8 vertices corner.
      const auto v = lattice(-half, half, m);
      std::vector<std::pair<Vec3<Scalar>, Vec3<Scalar>>> creases;
      for (const Scalar sa : {-half, half}) {
        for (const Scalar sb : {-half, half}) {
          creases.push_back({{-half, sa, sb}, {half, sa, sb}});
          creases.push_back({{sa, -half, sb}, {sa, half, sb}});
          creases.push_back({{sa, sb, -half}, {sa, sb, half}});
        }
      }
      for (Index i = 0; i <= m; ++i) {
        for (Index j = 0; j <= m; ++j) {
          for (Index k = 0; k <= m; ++k) {
            const int on_boundary = (i == 0 || i == m ? 1 : 0) +
                                    (j == 0 || j == m ? 1 : 0) +
                                    (k == 0 || k == m ? 1 : 0);
            if (on_boundary == 0) {
              continue;  // interior of the solid, not on the surface
            }
            const Vec3<Scalar> p(v[static_cast<std::size_t>(i)],
                                 v[static_cast<std::size_t>(j)],
                                 v[static_cast<std::size_t>(k)]);
            PointLabel label = PointLabel::plain;
            if (on_boundary == 3) {
              label = PointLabel::corner;
            } else {
              for (const auto& crease : creases) {
                if (point_segment_distance(p, crease.first, crease.second) <=
                    band) {
                  label = PointLabel::edge;
                  break;
                }
              }
            }
            b.add(p.x(), p.y(), p.z(), label);
          }
        }
      }
      break;
    }
    case ShapeKind::lbracket: {
      // Two perpendicular half-planes meeting in one crease along y; the
      // crease endpoints are the corner truth.
      const auto u = lattice(Scalar(0), s, m);
      const auto v = lattice(-half, half, m);
      const Vec3<Scalar> crease_a(0, -half, 0);
      const Vec3<Scalar> crease_b(0, half, 0);
      auto classify = [&](const Vec3<Scalar>& p) {
        if ((p - crease_a).norm() == Scalar(0) ||
            (p - crease_b).norm() == Scalar(0)) {
          return PointLabel::corner;
        }
        return point_segment_distance(p, crease_a, crease_b) <= band
                   ? PointLabel::edge
                   : PointLabel::plain;
      };
      for (Index i = 0; i <= m; ++i) {
        for (Index j = 0; j <= m; ++j) {
          const Vec3<Scalar> p(u[static_cast<std::size_t>(i)],
                               v[static_cast<std::size_t>(j)], Scalar(0));
          b.add(p.x(), p.y(), p.z(), classify(p));
        }
      }
      for (Index k = 1; k <= m; ++k) {  // k = 0 would duplicate the crease row
        for (Index j = 0; j <= m; ++j) {
          const Vec3<Scalar> p(Scalar(0), v[static_cast<std::size_t>(j)],
                               u[static_cast<std::size_t>(k)]);
          b.add(p.x(), p.y(), p.z(), classify(p));
        }
      }
      break;
    }
    case ShapeKind::panel: {
      // Base plate with an upright interior rib. The rib-plate crease is the
      // weld line; its endpoints are the corner truth.
      const auto u = lattice(Scalar(0), s, m);
      const Index ir = m / 2;
      const Index j1 = static_cast<Index>(std::llround(m / 4.0));
      const Index j2 = static_cast<Index>(std::llround(3.0 * m / 4.0));
      const Index mz = std::max<Index>(1, static_cast<Index>(std::llround(m / 2.0)));
      const Scalar xr = u[static_cast<std::size_t>(ir)];
      const Vec3<Scalar> crease_a(xr, u[static_cast<std::size_t>(j1)], 0);
      const Vec3<Scalar> crease_b(xr, u[static_cast<std::size_t>(j2)], 0);
      auto classify = [&](const Vec3<Scalar>& p) {
        if ((p - crease_a).norm() == Scalar(0) ||
            (p - crease_b).norm() == Scalar(0)) {
          return PointLabel::corner;
        }
        return point_segment_distance(p, crease_a, crease_b) <= band
                   ? PointLabel::edge
                   : PointLabel::plain;
      };
      for (Index i = 0; i <= m; ++i) {
        for (Index j = 0; j <= m; ++j) {
          const Vec3<Scalar> p(u[static_cast<std::size_t>(i)],
                               u[static_cast<std::size_t>(j)], Scalar(0));
          b.add(p.x(), p.y(), p.z(), classify(p));
        }
      }
      for (Index k = 1; k <= mz; ++k) {  // k = 0 would duplicate the crease row
        for (Index j = j1; j <= j2; ++j) {
          const Vec3<Scalar> p(xr, u[static_cast<std::size_t>(j)],
                               u[static_cast<std::size_t>(k)]);
          b.add(p.x(), p.y(), p.z(), classify(p));
        }
      }
      break;
    }
  }

  SyntheticShape<Scalar> shape;
  const Index n = static_cast<Index>(b.points.size());
  shape.cloud.points.resize(n, 3);
  for (Index i = 0; i < n; ++i) {
    shape.cloud.points.row(i) =
        b.points[static_cast<std::size_t>(i)].transpose();
  }
  shape.labels = std::move(b.labels);
  shape.truth =
      truth_from_labels(shape.cloud.points, shape.labels, TruthSource::synthetic);

  if (spec.noise_sigma > Scalar(0)) {
    synth_detail::GaussianStream gauss(spec.seed);
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < 3; ++c) {
        shape.cloud.points(i, c) +=
            spec.noise_sigma * static_cast<Scalar>(gauss.next());
      }
    }
  }
  return shape;
}

}  // namespace pcfeat
