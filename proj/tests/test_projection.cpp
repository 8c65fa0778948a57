#include <doctest.h>

#include <Eigen/Dense>

#include "dlms/projection.hpp"
#include "dlms/sampling.hpp"
#include "oracles.hpp"

using namespace dlms;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  CounterRng rng(seed);
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.next_normal();
  return m;
}
}  // namespace

TEST_CASE("projector onto x + y = 0") {
  MatrixXd D(1, 2);
  D << 1, 1;
  const AffineProjector p = build_projector(D, VectorXd::Zero(1));
  MatrixXd expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  CHECK((p.matrix - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(p.offset.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fully pinned manifold projects every point to the target") {
  const VectorXd c = VectorXd::LinSpaced(3, 1.0, 3.0);
  const AffineProjector p = build_projector(MatrixXd::Identity(3, 3), -c);
  CHECK(p.matrix.cwiseAbs().maxCoeff() < 1e-14);
  CHECK((p.offset + c).cwiseAbs().maxCoeff() < 1e-14);
  const VectorXd y = random_matrix(3, 1, 7);
  CHECK((p.project(y) - c).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("random wide constraint: feasibility and idempotence") {
  const MatrixXd D = random_matrix(2, 5, 42);
  const VectorXd b = random_matrix(2, 1, 43);
  const AffineProjector p = build_projector(D, b);
  CHECK((p.matrix * p.matrix - p.matrix).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p.matrix - p.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd y = random_matrix(5, 1, 100 + trial);
    CHECK((D * p.project(y) + b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("matches the SVD pseudo-inverse construction") {
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd D = random_matrix(3, 7, 500 + trial);
    const VectorXd b = random_matrix(3, 1, 600 + trial);
    const AffineProjector p = build_projector(D, b);
    const auto ref = oracles::dense_projector(D, b);
    CHECK((p.matrix - ref.matrix).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((p.offset - ref.offset).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("rank-deficient constraints are rejected with the rank found") {
  MatrixXd D(2, 3);
  D << 1, 2, 3, 2, 4, 6;  // second row is a multiple of the first
  try {
    build_projector(D, VectorXd::Zero(2));
    FAIL("expected RankError");
  } catch (const RankError& e) {
    CHECK(e.numerical_rank == 1);
    CHECK(e.expected_rank == 2);
  }
}
