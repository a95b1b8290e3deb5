#include "pcfeat/corner_detector.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using pcfeat::CornerParams;
using pcfeat::Index;
using pcfeat::Mat3;
using pcfeat::PointMatrix;
using pcfeat::Vec3;
using pcfeat::VecX;

namespace {

// Independent eigenvalue oracle: closed-form symmetric 3x3 solve through
// the characteristic polynomial (trigonometric method).
Vec3<double> eigenvalues_by_charpoly(const Mat3<double>& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = a.trace() / 3.0;
  if (p1 == 0.0) {
    Vec3<double> diag(a(0, 0), a(1, 1), a(2, 2));
    std::sort(diag.data(), diag.data() + 3);
    return diag;
  }
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Mat3<double> b = (a - q * Mat3<double>::Identity()) / p;
  double r = b.determinant() / 2.0;
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e3 = q + 2.0 * p * std::cos(phi);
  const double e1 = q + 2.0 * p * std::cos(phi + 2.0 * pcfeat::kPi / 3.0);
  const double e2 = 3.0 * q - e1 - e3;
  return {e1, e2, e3};
}

Vec3<double> random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3<double> v(g(rng), g(rng), g(rng));
  while (v.norm() < 1e-6) {
    v = Vec3<double>(g(rng), g(rng), g(rng));
  }
  return v.normalized();
}

}  // namespace

TEST_CASE("weighted covariance reproduces the hand-computed fixture") {
  PointMatrix<double> nb(4, 3);
  nb.row(0) << 1, 0, 0;
  nb.row(1) << -1, 0, 0;
  nb.row(2) << 0, 0.5, 0;
  nb.row(3) << 0, -0.5, 0;
  VecX<double> d(4);
  d << 1, 1, 0.5, 0.5;
  const auto sigma =
      pcfeat::weighted_covariance(Vec3<double>(0, 0, 0), nb, d, 2.0);
  Mat3<double> want;
  want << 0.4, 0, 0, 0, 0.15, 0, 0, 0, 0;
  CHECK((sigma - want).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("coincident neighbors produce the zero matrix") {
  PointMatrix<double> nb(3, 3);
  nb.row(0) << 0.5, 0.5, 0.5;
  nb.row(1) << 0.5, 0.5, 0.5;
  nb.row(2) << 0.5, 0.5, 0.5;
  VecX<double> d(3);
  d << 0.1, 0.1, 0.1;
  const auto sigma =
      pcfeat::weighted_covariance(Vec3<double>(0, 0, 0), nb, d, 1.0);
  CHECK(sigma.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weighted covariance is translation invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  PointMatrix<double> nb(12, 3);
  VecX<double> d(12);
  const Vec3<double> p(0.002, -0.001, 0.0005);
  for (Index i = 0; i < 12; ++i) {
    nb.row(i) << u(rng), u(rng), u(rng);
    d[i] = (nb.row(i).transpose() - p).norm();
  }
  const double radius = 0.05;
  const auto base = pcfeat::weighted_covariance(p, nb, d, radius);
  const Vec3<double> t(3.7, -12.0, 0.25);
  PointMatrix<double> moved = nb.rowwise() + t.transpose();
  const auto shifted =
      pcfeat::weighted_covariance(Vec3<double>(p + t), moved, d, radius);
  CHECK((base - shifted).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("weighted covariance rejects bad inputs") {
  PointMatrix<double> one(1, 3);
  one.row(0) << 1, 0, 0;
  VecX<double> d1(1);
  d1 << 0.5;
  CHECK_THROWS_AS(pcfeat::weighted_covariance(Vec3<double>(0, 0, 0), one, d1, 1.0),
                  pcfeat::InvalidArgument);

  PointMatrix<double> nb(2, 3);
  nb.row(0) << 1, 0, 0;
  nb.row(1) << 0, 1, 0;
  VecX<double> far(2);
  far << 0.5, 1.0;  // 1.0 is not < R
  CHECK_THROWS_AS(pcfeat::weighted_covariance(Vec3<double>(0, 0, 0), nb, far, 1.0),
                  pcfeat::InvalidArgument);

  VecX<double> wrong(1);
  wrong << 0.5;
  CHECK_THROWS_AS(
      pcfeat::weighted_covariance(Vec3<double>(0, 0, 0), nb, wrong, 1.0),
      pcfeat::InvalidArgument);
}

TEST_CASE("weighted covariance is PSD on random neighborhoods") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Index m = 2 + static_cast<Index>(rng() % 30);
    PointMatrix<double> nb(m, 3);
    VecX<double> d(m);
    const Vec3<double> p(u(rng), u(rng), u(rng));
    double max_d = 0;
    for (Index i = 0; i < m; ++i) {
      nb.row(i) << u(rng), u(rng), u(rng);
      d[i] = (nb.row(i).transpose() - p).norm();
      max_d = std::max(max_d, d[i]);
    }
    const double radius = max_d * 1.25 + 1e-6;
    const auto sigma = pcfeat::weighted_covariance(p, nb, d, radius);
    CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const auto cv = pcfeat::curvature_vector(sigma);
    CHECK(cv.eigenvalues[0] >= -1e-9);
  }
}

TEST_CASE("curvature vector of the diagonal fixture") {
  Mat3<double> sigma;
  sigma << 0.4, 0, 0, 0, 0.15, 0, 0, 0, 0;
  const auto cv = pcfeat::curvature_vector(sigma);
  CHECK(cv.e[0] == 0.0);
  CHECK(cv.e[1] == 0.0);
  CHECK(cv.e[2] == 1.0);
  CHECK(cv.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cv.eigenvalues[1] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(cv.eigenvalues[2] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(!cv.degenerate);
}

TEST_CASE("identity matrix is fully degenerate but still unit-canonical") {
  const auto cv = pcfeat::curvature_vector(Mat3<double>(Mat3<double>::Identity()));
  CHECK(cv.degenerate);
  CHECK(std::abs(cv.e.norm() - 1.0) <= 1e-9);
  int lead = 0;
  for (int c = 1; c < 3; ++c) {
    if (std::abs(cv.e[c]) > std::abs(cv.e[lead])) {
      lead = c;
    }
  }
  CHECK(cv.e[lead] > 0.0);
}

TEST_CASE("non-symmetric input is rejected") {
  Mat3<double> bad;
  bad << 1, 0.5, 0, 0.2, 1, 0, 0, 0, 1;
  CHECK_THROWS_AS(pcfeat::curvature_vector(bad), pcfeat::InvalidArgument);
}

TEST_CASE("eigen residual and charpoly agreement on random symmetric matrices") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    Mat3<double> a;
    const double m00 = u(rng), m01 = u(rng), m02 = u(rng);
    const double m11 = u(rng), m12 = u(rng), m22 = u(rng);
    a << m00, m01, m02, m01, m11, m12, m02, m12, m22;
    const auto cv = pcfeat::curvature_vector(a);

    const double lam1 = cv.eigenvalues[0];
    const double lam3 = cv.eigenvalues[2];
    CHECK((a * cv.e - lam1 * cv.e).norm() <= 1e-8 * std::max(1.0, lam3));
    CHECK(std::abs(cv.e.norm() - 1.0) <= 1e-9);

    const Vec3<double> oracle = eigenvalues_by_charpoly(a);
    const double scale = std::max(1.0, std::abs(lam3));
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(cv.eigenvalues[i] - oracle[i]) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("canonicalization flips the leading component positive") {
  // Rotate diag(0, 1, 2) so the smallest eigenvector points along a
  // direction with a negative dominant component.
  const Vec3<double> target = Vec3<double>(-0.8, 0.3, 0.5).normalized();
  Vec3<double> other = target.cross(Vec3<double>(0, 0, 1)).normalized();
  Vec3<double> third = target.cross(other);
  Mat3<double> rot;
  rot.col(0) = target;
  rot.col(1) = other;
  rot.col(2) = third;
  Mat3<double> sigma =
      rot * Vec3<double>(0, 1, 2).asDiagonal() * rot.transpose();
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();
  const auto cv = pcfeat::curvature_vector(sigma);
  // e must equal +-target with the dominant component positive, so +0.8
  // on x after the flip.
  CHECK(std::abs(std::abs(cv.e.dot(target)) - 1.0) <= 1e-9);
  CHECK(cv.e[0] > 0.0);
}

TEST_CASE("cluster count follows per-axis extents") {
  auto with_extents = [](double ex, double ey, double ez) {
    PointMatrix<double> nb(2, 3);
    nb.row(0) << 0, 0, 0;
    nb.row(1) << ex, ey, ez;
    return nb;
  };
  CHECK(pcfeat::cluster_count(with_extents(0.02, 0.02, 0.001), 0.005) == 2);
  CHECK(pcfeat::cluster_count(with_extents(0.02, 0.02, 0.02), 0.005) == 3);
  CHECK(pcfeat::cluster_count(with_extents(0.02, 0.001, 0.001), 0.005) == 1);
  // nothing exceeds rho: still reported as the single-line reject value
  CHECK(pcfeat::cluster_count(with_extents(0.001, 0.001, 0.001), 0.005) == 1);
  // boundary is strict
  CHECK(pcfeat::cluster_count(with_extents(0.005, 0.0, 0.0), 0.005) == 1);

  PointMatrix<double> one(1, 3);
  one.row(0) << 0, 0, 0;
  CHECK_THROWS_AS(pcfeat::cluster_count(one, 0.005), pcfeat::InvalidArgument);
}

TEST_CASE("axial k-means separates two clean clusters") {
  const std::vector<Vec3<double>> vectors = {
      Vec3<double>(1, 0, 0), Vec3<double>(1, 0, 0), Vec3<double>(0, 1, 0),
      Vec3<double>(0, 1, 0)};
  const auto res = pcfeat::kmeans_axial(vectors, 2);
  REQUIRE(res.sizes.size() == 2);
  CHECK(res.sizes[0] == 2);
  CHECK(res.sizes[1] == 2);
  CHECK(res.means[0] == Vec3<double>(1, 0, 0));
  CHECK(res.means[1] == Vec3<double>(0, 1, 0));
  CHECK(res.objective_history.back() == 0.0);
}

TEST_CASE("opposite vectors are one axis: repair splits, objective zero") {
  const std::vector<Vec3<double>> vectors = {Vec3<double>(1, 0, 0),
                                             Vec3<double>(-1, 0, 0)};
  const auto res = pcfeat::kmeans_axial(vectors, 2);
  REQUIRE(res.sizes.size() == 2);
  CHECK(res.sizes[0] == 1);
  CHECK(res.sizes[1] == 1);
  CHECK(res.objective_history.back() == 0.0);
  // both means canonicalize to the same axis
  CHECK(res.means[0] == Vec3<double>(1, 0, 0));
  CHECK(res.means[1] == Vec3<double>(1, 0, 0));
}

TEST_CASE("k-means objective never increases and assignments are stable") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 39);
    const int nc = 2 + static_cast<int>(rng() % 2);
    if (n < nc) {
      continue;
    }
    std::vector<Vec3<double>> vectors;
    vectors.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      vectors.push_back(random_unit(rng));
    }
    const auto res = pcfeat::kmeans_axial(vectors, nc);
    REQUIRE(!res.objective_history.empty());
    for (std::size_t t = 1; t < res.objective_history.size(); ++t) {
      CHECK(res.objective_history[t] <= res.objective_history[t - 1]);
    }
    CHECK(res.iterations <= 50);

    Index total = 0;
    for (const auto s : res.sizes) {
      CHECK(s > 0);
      total += s;
    }
    CHECK(total == n);

    // Fixed final means: no vector sits closer to a foreign mean.
    if (res.iterations < 50) {
      for (int i = 0; i < n; ++i) {
        const auto home = static_cast<std::size_t>(res.assignment[static_cast<std::size_t>(i)]);
        const double own = pcfeat::axial_distance_sq(vectors[static_cast<std::size_t>(i)],
                                                     res.means[home]);
        for (std::size_t c = 0; c < res.means.size(); ++c) {
          CHECK(own <= pcfeat::axial_distance_sq(vectors[static_cast<std::size_t>(i)],
                                                 res.means[c]));
        }
      }
    }
  }
}

TEST_CASE("k-means is deterministic and validates its inputs") {
  std::mt19937_64 rng(9);
  std::vector<Vec3<double>> vectors;
  for (int i = 0; i < 15; ++i) {
    vectors.push_back(random_unit(rng));
  }
  const auto a = pcfeat::kmeans_axial(vectors, 3);
  const auto b = pcfeat::kmeans_axial(vectors, 3);
  CHECK(a.assignment == b.assignment);
  CHECK(a.objective_history == b.objective_history);

  CHECK_THROWS_AS(pcfeat::kmeans_axial(vectors, 1), pcfeat::InvalidArgument);
  const std::vector<Vec3<double>> two = {Vec3<double>(1, 0, 0),
                                         Vec3<double>(0, 1, 0)};
  CHECK_THROWS_AS(pcfeat::kmeans_axial(two, 3), pcfeat::InvalidArgument);
}

TEST_CASE("corner rule fixtures") {
  CornerParams<double> params;  // defaults: eps 3, theta 60..130 deg

  SUBCASE("orthogonal balanced clusters are a corner") {
    const std::vector<Index> sizes = {7, 7, 6};
    const std::vector<Vec3<double>> means = {
        Vec3<double>(1, 0, 0), Vec3<double>(0, 1, 0), Vec3<double>(0, 0, 1)};
    const auto [verdict, angles] = pcfeat::corner_test(sizes, means, params);
    CHECK(verdict);
    REQUIRE(angles.size() == 3);
    for (const double phi : angles) {
      CHECK(std::abs(phi - pcfeat::kPi / 2.0) <= 1e-12);
    }
  }

  SUBCASE("size bias rejects") {
    const std::vector<Index> sizes = {15, 3, 2};
    const std::vector<Vec3<double>> means = {
        Vec3<double>(1, 0, 0), Vec3<double>(0, 1, 0), Vec3<double>(0, 0, 1)};
    const auto [verdict, angles] = pcfeat::corner_test(sizes, means, params);
    CHECK(!verdict);
  }

  SUBCASE("parallel means reject via phi below theta1") {
    const std::vector<Index> sizes = {5, 5};
    const std::vector<Vec3<double>> means = {Vec3<double>(1, 0, 0),
                                             Vec3<double>(1, 0, 0)};
    const auto [verdict, angles] = pcfeat::corner_test(sizes, means, params);
    CHECK(!verdict);
    CHECK(angles[0] == 0.0);
  }

  SUBCASE("verdict ignores sign flips of the means") {
    const std::vector<Index> sizes = {7, 7, 6};
    const std::vector<Vec3<double>> flipped = {
        Vec3<double>(-1, 0, 0), Vec3<double>(0, 1, 0), Vec3<double>(0, 0, -1)};
    const auto [verdict, angles] = pcfeat::corner_test(sizes, flipped, params);
    CHECK(verdict);
    for (const double phi : angles) {
      CHECK(std::abs(phi - pcfeat::kPi / 2.0) <= 1e-12);
    }
  }

  SUBCASE("strict angle bounds") {
    CornerParams<double> tight;
    tight.theta1 = pcfeat::kPi / 2.0;  // exactly 90 degrees
    const std::vector<Index> sizes = {5, 5};
    const std::vector<Vec3<double>> means = {Vec3<double>(1, 0, 0),
                                             Vec3<double>(0, 1, 0)};
    // phi == theta1 fails the open interval
    const auto [verdict, angles] = pcfeat::corner_test(sizes, means, tight);
    CHECK(!verdict);
  }

  SUBCASE("epsilon is strict") {
    CornerParams<double> eps3;
    const std::vector<Vec3<double>> means = {Vec3<double>(1, 0, 0),
                                             Vec3<double>(0, 1, 0)};
    const auto [v, a] = pcfeat::corner_test({10, 7}, means, eps3);
    CHECK(!v);  // |10-7| = 3 is not < 3
    CHECK(pcfeat::corner_test({10, 8}, means, eps3).first);
  }

  SUBCASE("bad arity is rejected") {
    const std::vector<Vec3<double>> one = {Vec3<double>(1, 0, 0)};
    CHECK_THROWS_AS(pcfeat::corner_test({5}, one, params),
                    pcfeat::InvalidArgument);
  }
}

TEST_CASE("corner merging") {
  SUBCASE("two close candidates collapse to their centroid") {
    const std::vector<Vec3<double>> cands = {Vec3<double>(0, 0, 0),
                                             Vec3<double>(0.001, 0, 0)};
    const auto merged = pcfeat::merge_corners(cands, 0.01);
    REQUIRE(merged.size() == 1);
    CHECK(std::abs(merged[0].position[0] - 0.0005) <= 1e-15);
    CHECK(merged[0].members == std::vector<Index>{0, 1});
  }

  SUBCASE("distant candidates stay separate") {
    const std::vector<Vec3<double>> cands = {Vec3<double>(0, 0, 0),
                                             Vec3<double>(1, 0, 0)};
    const auto merged = pcfeat::merge_corners(cands, 0.01);
    CHECK(merged.size() == 2);
  }

  SUBCASE("empty input gives empty output") {
    CHECK(pcfeat::merge_corners(std::vector<Vec3<double>>{}, 0.01).empty());
  }

  SUBCASE("single linkage chains transitively") {
    const std::vector<Vec3<double>> cands = {Vec3<double>(0, 0, 0),
                                             Vec3<double>(0.018, 0, 0),
                                             Vec3<double>(0.009, 0, 0)};
    const auto merged = pcfeat::merge_corners(cands, 0.01);
    REQUIRE(merged.size() == 1);
    CHECK(std::abs(merged[0].position[0] - 0.009) <= 1e-15);
    CHECK(merged[0].members == std::vector<Index>{0, 1, 2});
  }

  SUBCASE("components are ordered by smallest member index") {
    const std::vector<Vec3<double>> cands = {
        Vec3<double>(5, 0, 0), Vec3<double>(0, 0, 0), Vec3<double>(5.001, 0, 0)};
    const auto merged = pcfeat::merge_corners(cands, 0.01);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].members == std::vector<Index>{0, 2});
    CHECK(merged[1].members == std::vector<Index>{1});
  }

  SUBCASE("merge radius is strict") {
    const std::vector<Vec3<double>> cands = {Vec3<double>(0, 0, 0),
                                             Vec3<double>(0.01, 0, 0)};
    const auto merged = pcfeat::merge_corners(cands, 0.01);
    CHECK(merged.size() == 2);  // distance == radius does not merge
  }
}

TEST_CASE("a straight edge line yields no corners via the single-axis reject") {
  pcfeat::PointCloud<double> cloud;
  const int n = 41;
  cloud.points.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    cloud.points.row(i) << 0.002 * i, 0.0, 0.0;
  }
  pcfeat::EdgeLabeling<double> edges;
  edges.is_edge = pcfeat::BoolArray::Constant(n, true);
  CornerParams<double> params;
  params.K = 6;
  const auto result = pcfeat::detect_corners(cloud, edges, params);
  CHECK(result.corners.empty());
  CHECK(result.candidates.empty());
  // every evaluated point got rejected by the extent rule, not by angles
  CHECK(result.stats.empty());
}

TEST_CASE("detect_corners validates parameters and edge supply") {
  pcfeat::PointCloud<double> cloud;
  cloud.points.resize(10, 3);
  for (int i = 0; i < 10; ++i) {
    cloud.points.row(i) << 0.01 * i, 0, 0;
  }
  pcfeat::EdgeLabeling<double> edges;
  edges.is_edge = pcfeat::BoolArray::Constant(10, true);

  CornerParams<double> small_k;
  small_k.K = 5;
  CHECK_THROWS_AS(pcfeat::detect_corners(cloud, edges, small_k),
                  pcfeat::InvalidArgument);

  CornerParams<double> bad_theta;
  bad_theta.theta1 = 2.0;
  bad_theta.theta2 = 1.0;
  CHECK_THROWS_AS(pcfeat::detect_corners(cloud, edges, bad_theta),
                  pcfeat::InvalidArgument);

  CornerParams<double> bad_rho;
  bad_rho.rho = 0.0;
  CHECK_THROWS_AS(pcfeat::detect_corners(cloud, edges, bad_rho),
                  pcfeat::InvalidArgument);

  CornerParams<double> negative_r;
  negative_r.R = -1.0;
  CHECK_THROWS_AS(pcfeat::detect_corners(cloud, edges, negative_r),
                  pcfeat::InvalidArgument);

  // 10 edge points cannot supply K+1 = 21
  CornerParams<double> ok;
  CHECK_THROWS_AS(pcfeat::detect_corners(cloud, edges, ok),
                  pcfeat::ComputeError);

  pcfeat::EdgeLabeling<double> mismatched;
  mismatched.is_edge = pcfeat::BoolArray::Constant(7, true);
  CHECK_THROWS_AS(pcfeat::detect_corners(cloud, mismatched, ok),
                  pcfeat::InvalidArgument);
}
