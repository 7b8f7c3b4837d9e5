#include <random>
#include <sstream>

#include "doctest.h"

#include "kmcert/dataset_io.hpp"
#include "kmcert/errors.hpp"
#include "kmcert/geometry.hpp"
#include "oracle.hpp"

using namespace kmcert;
using doctest::Approx;

TEST_CASE("EX1 centers, operator norms and pair statistics") {
  const Dataset d = oracle::ex1();
  const Partition p = oracle::ex1_partition();
  const ClusterGeometry g = compute_geometry(d, p);
  CHECK(g.centers(0, 0) == Approx(1.0));
  CHECK(g.centers(1, 0) == Approx(6.0));
  CHECK(g.op_norms(0) == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(g.op_norms(1) == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(g.op_norm_sq_sum == Approx(4.0).epsilon(1e-12));

  const PairStats s = compute_pair_stats(g);
  CHECK(s.h(0, 1) == Approx(5.0));
  CHECK(s.w(0, 1)(0) == Approx(1.0));
  CHECK(s.w(0, 1)(1) == Approx(0.0));
  CHECK(s.u(0, 1)(0) == Approx(-1.0));
  CHECK(s.u(0, 1)(1) == Approx(1.0));
  CHECK(s.u(1, 0)(0) == Approx(1.0));
  CHECK(s.u(1, 0)(1) == Approx(-1.0));
  CHECK(s.tau(0, 1) == Approx(1.0));
}

TEST_CASE("EX1 cross block of the distance matrix") {
  const BlockDistances bd = distance_matrix(oracle::ex1(), oracle::ex1_partition());
  Eigen::Matrix2d expect;
  expect << 25, 49, 9, 25;
  CHECK((bd.D.block(0, 2, 2, 2) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("singleton clusters have zero spread") {
  Dataset d;
  d.points.resize(2, 2);
  d.points << 0, 0, 3, 4;
  const Partition p = Partition::from_labels({0, 1});
  const ClusterGeometry g = compute_geometry(d, p);
  CHECK(g.op_norms.maxCoeff() == 0.0);
  const PairStats s = compute_pair_stats(g);
  CHECK(s.h(0, 1) == Approx(5.0));
  CHECK(s.tau(0, 1) == 0.0);
  const BlockDistances bd = distance_matrix(d, p);
  CHECK(bd.D(0, 0) == 0.0);
}

TEST_CASE("duplicate points give a zero centered block") {
  Dataset d;
  d.points.resize(3, 2);
  d.points << 1, 1, 1, 1, 5, 5;
  const ClusterGeometry g = compute_geometry(d, Partition::from_labels({0, 0, 1}));
  CHECK(g.op_norms(0) == 0.0);
}

TEST_CASE("two points at distance 3") {
  Dataset d;
  d.points.resize(2, 1);
  d.points << 0, 3;
  const Eigen::MatrixXd D = squared_distances(d.points);
  CHECK(D(0, 1) == Approx(9.0));
  CHECK(D(1, 0) == Approx(9.0));
}

TEST_CASE("error reporting") {
  const Dataset d = oracle::ex1();
  CHECK_THROWS_AS(compute_geometry(d, Partition::from_labels({0, 1, 1})), DimensionMismatch);
  CHECK_THROWS_AS(Partition::from_labels({0, 2, 2}), EmptyCluster);
  Dataset same;
  same.points.resize(4, 1);
  same.points << -1, 1, -2, 2;
  const ClusterGeometry g = compute_geometry(same, Partition::from_labels({0, 0, 1, 1}));
  CHECK_THROWS_AS(compute_pair_stats(g), CoincidentCenters);
}

TEST_CASE("random instances: centering, norms and projection identities") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 3;
    const Dataset d = oracle::random_instance(rng, 10 + trial, k, 1 + trial % 4);
    const Partition p = Partition::from_labels(*d.truth_labels, k);
    const ClusterGeometry g = compute_geometry(d, p);
    const PairStats s = compute_pair_stats(g);
    for (int a = 0; a < k; ++a) {
      const auto& X = g.centered_blocks[static_cast<std::size_t>(a)];
      const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
      CHECK(X.colwise().sum().cwiseAbs().maxCoeff() <= 1e-9 * X.rows() * scale);
      CHECK(g.op_norms(a) <= std::sqrt(g.frob_sq(a)) + 1e-12);
      std::normal_distribution<double> gauss;
      Eigen::VectorXd v(g.dim());
      for (auto& x : v) x = gauss(rng);
      CHECK((X * v).norm() <= g.op_norms(a) * v.norm() * (1 + 1e-12));
      for (int b = 0; b < k; ++b) {
        if (a == b) continue;
        CHECK((s.w(a, b) + s.w(b, a)).norm() < 1e-12);
        CHECK(s.w(a, b).norm() == Approx(1.0));
        CHECK(std::abs(s.u(a, b).sum()) < 1e-9 * s.u(a, b).size() * scale);
        const double lhs = oracle::bisector_margin(d, p.labels(), a, b);
        CHECK(std::abs(lhs - (0.5 * s.h(a, b) - s.tau(a, b))) <= 1e-10 * std::max(1.0, s.h(a, b)));
      }
    }
  }
}

TEST_CASE("rigid motions leave h, tau and operator norms unchanged") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 3;
    const Dataset d = oracle::random_instance(rng, 30, 3, m);
    const Partition p = Partition::from_labels(*d.truth_labels, 3);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd A(m, m);
    for (auto& x : A.reshaped()) x = gauss(rng);
    const Eigen::MatrixXd R = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
    Eigen::RowVectorXd shift(m);
    for (auto& x : shift) x = 10 * gauss(rng);
    Dataset moved = d;
    moved.points = (d.points * R.transpose()).rowwise() + shift;

    const ClusterGeometry g0 = compute_geometry(d, p);
    const ClusterGeometry g1 = compute_geometry(moved, p);
    const PairStats s0 = compute_pair_stats(g0);
    const PairStats s1 = compute_pair_stats(g1);
    CHECK((g0.op_norms - g1.op_norms).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((s0.h - s1.h).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((s0.tau - s1.tau).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("power iteration agrees with the SVD on a large block") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd X(200000, 6);
  for (auto& x : X.reshaped()) x = gauss(rng);
  X.col(2) *= 3.0;
  const double svd = Eigen::JacobiSVD<Eigen::MatrixXd>(X).singularValues()(0);
  CHECK(operator_norm(X) == Approx(svd).epsilon(1e-9));
}

TEST_CASE("CSV parsing detects header and label column") {
  std::istringstream with_labels("x,y,label\n0,0,0\n2,0,0\n5,0,1\n7,0,1\n");
  const Dataset d = parse_dataset_csv(with_labels);
  CHECK(d.size() == 4);
  CHECK(d.dim() == 2);
  REQUIRE(d.truth_labels);
  CHECK((*d.truth_labels)[2] == 1);

  std::istringstream plain("1.5,2\n3,4\n");
  const Dataset q = parse_dataset_csv(plain);
  CHECK(q.size() == 2);
  CHECK(q.dim() == 2);
  CHECK_FALSE(q.truth_labels);

  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(parse_dataset_csv(ragged), ValidationError);
  std::istringstream text("a,b\n1,x\n");
  CHECK_THROWS_AS(parse_dataset_csv(text), ValidationError);
  std::istringstream gap("x,label\n0,0\n1,2\n");
  CHECK_THROWS_AS(parse_dataset_csv(gap), ValidationError);
  CHECK_THROWS_AS(read_dataset_csv("/nonexistent/file.csv"), IoError);
}

TEST_CASE("CSV round trip is exact") {
  std::mt19937_64 rng(8);
  const Dataset d = oracle::random_instance(rng, 25, 3, 4);
  std::stringstream buf;
  write_dataset_csv(buf, d);
  const Dataset back = parse_dataset_csv(buf);
  CHECK(back.points == d.points);
  CHECK(*back.truth_labels == *d.truth_labels);
}
