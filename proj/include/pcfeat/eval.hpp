#pragma once

#include "pcfeat/corner_detector.hpp"
#include "pcfeat/edge_detector.hpp"
#include "pcfeat/kdtree.hpp"
#include "pcfeat/synthetic.hpp"
#include "pcfeat/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

namespace pcfeat {

template <typename Scalar>
struct PRReport {
  Index tp = 0;
  Index fp = 0;
  Index fn = 0;
  Scalar precision = 1;
  Scalar recall = 1;
  std::string param_name;   // swept parameter, empty for direct runs
  Scalar param_value = 0;
  double millis = 0;        // detector runtime, filled by sweep/CLI
};

enum class SweepDetector { ms_edge, ev_edge, corner };

template <typename Scalar>
struct SweepSpec {
  SweepDetector detector = SweepDetector::ms_edge;
  std::string parameter;        // which knob to vary, see sweep()
  std::vector<Scalar> values;   // non-empty, reported in this order
  EdgeParams<Scalar> edge;      // fixed parameters for ms-edge (and the
                                // edge stage feeding a corner sweep)
  CornerParams<Scalar> corner;  // fixed parameters for corner
  Index ev_k = 100;             // fixed neighborhood for ev-edge
  Scalar ev_sigma = Scalar(0.1);  // fixed threshold for ev-edge
  Scalar tau = 0;               // match radius; 0 = 1.5x mean nn spacing
};

/// Greedy one-to-one matching of detections against truth: candidate pairs
/// within tau are taken in ascending (distance, detected index, truth index)
/// order, each point matched at most once. tp+fp = |detected| and
/// tp+fn = |truth| by construction. An empty detection set scores
/// precision 1 only against empty truth.
template <typename Scalar>
PRReport<Scalar> match_and_score(const PointMatrix<Scalar>& detected,
                                 const PointMatrix<Scalar>& truth, Scalar tau) {
  if (!(tau > Scalar(0))) {
    throw InvalidArgument("matching distance tau must be > 0");
  }

  struct Pair {
    Scalar d;
    Index det;
    Index tru;
  };
  std::vector<Pair> pairs;
  if (detected.rows() > 0 && truth.rows() > 0) {
    const KdTree<Scalar> tree(truth);
    // radius_search is strict; pad so pairs at exactly tau survive the cut
    const Scalar pad = tau * (Scalar(1) + Scalar(1e-9));
    for (Index i = 0; i < detected.rows(); ++i) {
      const Vec3<Scalar> q = detected.row(i).transpose();
      for (const auto& nb : tree.radius_search(q, pad)) {
        if (nb.distance <= tau) {
          pairs.push_back({nb.distance, i, nb.index});
        }
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return std::tie(x.d, x.det, x.tru) < std::tie(y.d, y.det, y.tru);
  });

  std::vector<char> det_used(static_cast<std::size_t>(detected.rows()), 0);
  std::vector<char> tru_used(static_cast<std::size_t>(truth.rows()), 0);
  PRReport<Scalar> report;
  for (const auto& pr : pairs) {
    auto& du = det_used[static_cast<std::size_t>(pr.det)];
    auto& tu = tru_used[static_cast<std::size_t>(pr.tru)];
    if (!du && !tu) {
      du = 1;
      tu = 1;
      ++report.tp;
    }
  }
  report.fp = detected.rows() - report.tp;
  report.fn = truth.rows() - report.tp;
  if (report.tp + report.fp > 0) {
    report.precision = static_cast<Scalar>(report.tp) /
                       static_cast<Scalar>(report.tp + report.fp);
  } else {
    report.precision = report.fn == 0 ? Scalar(1) : Scalar(0);
  }
  report.recall = report.tp + report.fn > 0
                      ? static_cast<Scalar>(report.tp) /
                            static_cast<Scalar>(report.tp + report.fn)
                      : Scalar(1);
  return report;
}

/// Eigenvalue baseline: per point, the surface variation of its k nearest
/// neighbors, sigma = l1/(l1+l2+l3) with eigenvalues ascending, clamped to
/// [0, 1/3]. A point is an edge iff sigma exceeds the threshold. Fills the
/// sigma channel of the labeling; the centroid-shift channels stay zero.
template <typename Scalar>
EdgeLabeling<Scalar> ev_baseline(const PointCloud<Scalar>& cloud,
                                 const KdTree<Scalar>& index, Index k,
                                 Scalar sigma_threshold) {
  const Index n = cloud.size();
  if (k < 2) {
    throw InvalidArgument("ev neighborhood size k must be >= 2");
  }
  if (!(sigma_threshold >= Scalar(0) && sigma_threshold <= Scalar(1))) {
    throw InvalidArgument("ev sigma threshold must be in [0, 1]");
  }
  if (index.size() != n) {
    throw InvalidArgument("spatial index was not built over this cloud");
  }
  if (n < k + 1) {
    throw ComputeError("cloud too small for the requested neighborhood");
  }

  EdgeLabeling<Scalar> out;
  out.is_edge = BoolArray::Constant(n, false);
  out.shift = VecX<Scalar>::Zero(n);
  out.resolution = VecX<Scalar>::Zero(n);
  out.centroid = PointMatrix<Scalar>::Zero(n, 3);
  out.sigma = VecX<Scalar>::Zero(n);

  const Scalar third = Scalar(1) / Scalar(3);
  for (Index i = 0; i < n; ++i) {
    const Vec3<Scalar> p = cloud.point(i);
    const auto neighbors = index.knn(p, k, /*exclude_self=*/true);

    Vec3<Scalar> mean = Vec3<Scalar>::Zero();
    for (const auto& nb : neighbors) {
      mean += cloud.point(nb.index);
    }
    mean /= static_cast<Scalar>(k);
    out.centroid.row(i) = mean.transpose();

    Mat3<Scalar> cov = Mat3<Scalar>::Zero();
    for (const auto& nb : neighbors) {
      const Vec3<Scalar> d = cloud.point(nb.index) - mean;
      cov(0, 0) += d.x() * d.x();
      cov(0, 1) += d.x() * d.y();
      cov(0, 2) += d.x() * d.z();
      cov(1, 1) += d.y() * d.y();
      cov(1, 2) += d.y() * d.z();
      cov(2, 2) += d.z() * d.z();
    }
    cov(1, 0) = cov(0, 1);
    cov(2, 0) = cov(0, 2);
    cov(2, 1) = cov(1, 2);
    cov /= static_cast<Scalar>(k);

    Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> solver(cov);
    const Vec3<Scalar> ev = solver.eigenvalues();  // ascending
    const Scalar sum = ev.sum();
    Scalar sigma = 0;
    if (sum >= Scalar(1e-30)) {
      sigma = std::min(third, std::max(Scalar(0), ev[0] / sum));
    }
    out.sigma[i] = sigma;
    out.is_edge[i] = sigma > sigma_threshold;
  }
  return out;
}

namespace eval_detail {

template <typename Scalar>
PointMatrix<Scalar> flagged_points(const PointCloud<Scalar>& cloud,
                                   const EdgeLabeling<Scalar>& labeling) {
  const auto rows = labeling.edge_indices();
  PointMatrix<Scalar> out(static_cast<Index>(rows.size()), 3);
  for (Index i = 0; i < out.rows(); ++i) {
    out.row(i) = cloud.points.row(rows[static_cast<std::size_t>(i)]);
  }
  return out;
}

template <typename Scalar>
PointMatrix<Scalar> corner_positions_matrix(const CornerResult<Scalar>& result) {
  PointMatrix<Scalar> out(static_cast<Index>(result.corners.size()), 3);
  for (Index i = 0; i < out.rows(); ++i) {
    out.row(i) =
        result.corners[static_cast<std::size_t>(i)].position.transpose();
  }
  return out;
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace eval_detail

/// Runs one detector repeatedly, varying a single named parameter, and
/// scores each run against the matching truth set. Parameter names:
/// ms-edge "k" | "lambda"; ev-edge "k" | "sigma"; corner "K" | "R" | "rho" |
/// "epsilon" | "theta1" | "theta2" | "merge_radius" (angles in radians).
/// One spatial index serves every run; a corner sweep computes the edge
/// stage once with the fixed edge parameters.
template <typename Scalar>
std::vector<PRReport<Scalar>> sweep(const PointCloud<Scalar>& cloud,
                                    const GroundTruth<Scalar>& truth,
                                    const SweepSpec<Scalar>& spec) {
  if (spec.values.empty()) {
    throw InvalidArgument("sweep needs at least one parameter value");
  }
  if (!(spec.tau >= Scalar(0))) {
    throw InvalidArgument("matching distance tau must be >= 0 (0 = auto)");
  }

  const KdTree<Scalar> index = build_index(cloud);
  const Scalar tau = spec.tau > Scalar(0)
                         ? spec.tau
                         : Scalar(1.5) * mean_nn_spacing(index);

  auto as_count = [](Scalar v, const char* what) {
    const auto k = static_cast<Index>(std::llround(static_cast<double>(v)));
    if (static_cast<Scalar>(k) != v || k < 0) {
      throw InvalidArgument(std::string(what) +
                            " must be a non-negative integer");
    }
    return k;
  };

  EdgeLabeling<Scalar> fixed_edges;  // edge stage for corner sweeps
  if (spec.detector == SweepDetector::corner) {
    fixed_edges = detect_edges(cloud, index, spec.edge);
  }

  std::vector<PRReport<Scalar>> reports;
  reports.reserve(spec.values.size());
  for (const Scalar value : spec.values) {
    PointMatrix<Scalar> detected(0, 3);
    const PointMatrix<Scalar>* truth_set = &truth.edge_points;
    const auto start = std::chrono::steady_clock::now();

    switch (spec.detector) {
      case SweepDetector::ms_edge: {
        EdgeParams<Scalar> params = spec.edge;
        if (spec.parameter == "k") {
          params.k = as_count(value, "edge neighborhood k");
        } else if (spec.parameter == "lambda") {
          params.lambda = value;
        } else {
          throw InvalidArgument("unknown ms-edge sweep parameter: " +
                                spec.parameter);
        }
        detected =
            eval_detail::flagged_points(cloud, detect_edges(cloud, index, params));
        break;
      }
      case SweepDetector::ev_edge: {
        Index k = spec.ev_k;
        Scalar threshold = spec.ev_sigma;
        if (spec.parameter == "k") {
          k = as_count(value, "ev neighborhood k");
        } else if (spec.parameter == "sigma") {
          threshold = value;
        } else {
          throw InvalidArgument("unknown ev-edge sweep parameter: " +
                                spec.parameter);
        }
        detected = eval_detail::flagged_points(
            cloud, ev_baseline(cloud, index, k, threshold));
        break;
      }
      case SweepDetector::corner: {
        CornerParams<Scalar> params = spec.corner;
        if (spec.parameter == "K") {
          params.K = as_count(value, "corner neighborhood K");
        } else if (spec.parameter == "R") {
          params.R = value;
        } else if (spec.parameter == "rho") {
          params.rho = value;
        } else if (spec.parameter == "epsilon") {
          params.epsilon = value;
        } else if (spec.parameter == "theta1") {
          params.theta1 = value;
        } else if (spec.parameter == "theta2") {
          params.theta2 = value;
        } else if (spec.parameter == "merge_radius") {
          params.merge_radius = value;
        } else {
          throw InvalidArgument("unknown corner sweep parameter: " +
                                spec.parameter);
        }
        detected = eval_detail::corner_positions_matrix(
            detect_corners(cloud, fixed_edges, params));
        truth_set = &truth.corner_points;
        break;
      }
    }

    const double millis = eval_detail::elapsed_ms(start);
    PRReport<Scalar> report = match_and_score(detected, *truth_set, tau);
    report.param_name = spec.parameter;
    report.param_value = value;
    report.millis = millis;
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace pcfeat
