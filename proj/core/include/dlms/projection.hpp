#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace dlms {

/// Affine projector onto {y : D y + b = 0}: project(y) = matrix * y - offset,
/// with matrix = I - D^+ D and offset = D^+ b.
struct AffineProjector {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;

  Eigen::VectorXd project(const Eigen::VectorXd& y) const {
    return matrix * y - offset;
  }
};

/// Thrown when a constraint matrix fails the full-row-rank requirement.
/// Carries the numerical rank found by the pivoted factorization.
class RankError : public std::runtime_error {
 public:
  RankError(std::string what, int numerical_rank, int expected_rank)
      : std::runtime_error(std::move(what)),
        numerical_rank(numerical_rank),
        expected_rank(expected_rank) {}
  int numerical_rank;
  int expected_rank;
};

/// Builds the projector onto {y : D y + b = 0} by solving with the Gram
/// matrix D D^T (pivoted LDLT; D is required to have full row rank).
/// Pivots below 1e-10 times the largest pivot flag rank deficiency.
AffineProjector build_projector(const Eigen::MatrixXd& D, const Eigen::VectorXd& b);

/// Solves G x = rhs with G = D D^T through the same pivoted factorization and
/// rank policy as build_projector.
Eigen::MatrixXd solve_gram(const Eigen::MatrixXd& D, const Eigen::MatrixXd& rhs);

}  // namespace dlms
