#include <doctest.h>

#include <Eigen/Dense>

#include "dlms/block_kron.hpp"
#include "dlms/sampling.hpp"

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

MatrixXd plain_kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int r = 0; r < A.rows(); ++r)
    for (int c = 0; c < A.cols(); ++c)
      out.block(r * B.rows(), c * B.cols(), B.rows(), B.cols()) = A(r, c) * B;
  return out;
}

}  // namespace

TEST_CASE("scalar blocks reduce bvec to vec and block_kron to kron") {
  const BlockDims dims(4, 1);
  const MatrixXd A = random_matrix(4, 4, 11);
  const MatrixXd B = random_matrix(4, 4, 12);
  VectorXd v = bvec(A, dims);
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) CHECK(v(c * 4 + r) == A(r, c));
  CHECK((block_kron(A, B, dims) - plain_kron(A, B)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bvec of identity with blocks {2,3} stacks block columns") {
  const BlockDims dims{2, 3};
  const VectorXd v = bvec(MatrixXd::Identity(5, 5), dims);
  REQUIRE(v.size() == 25);
  VectorXd expected = VectorXd::Zero(25);
  expected(0) = expected(3) = 1.0;                      // vec(I_2)
  expected(16) = expected(20) = expected(24) = 1.0;     // vec(I_3) after two zero blocks
  CHECK((v - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK((unbvec(v, dims) - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bvec(U S W) identity with mixed block sizes") {
  const BlockDims dims{2, 3};
  const MatrixXd U = random_matrix(5, 5, 21);
  const MatrixXd S = random_matrix(5, 5, 22);
  const MatrixXd W = random_matrix(5, 5, 23);
  const VectorXd lhs = bvec(U * S * W, dims);
  const VectorXd rhs = block_kron(W.transpose(), U, dims) * bvec(S, dims);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("block kron mixed product property") {
  const BlockDims dims{1, 2};
  const MatrixXd A = random_matrix(3, 3, 31), B = random_matrix(3, 3, 32);
  const MatrixXd C = random_matrix(3, 3, 33), D = random_matrix(3, 3, 34);
  const MatrixXd lhs = block_kron(A, B, dims) * block_kron(C, D, dims);
  const MatrixXd rhs = block_kron(MatrixXd(A * C), MatrixXd(B * D), dims);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}
