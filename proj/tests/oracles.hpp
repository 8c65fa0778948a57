#pragma once

// Independent reference implementations the tests check the library against.
// Everything here deliberately avoids the code paths used in core/.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dlms/theory.hpp"

namespace oracles {

/// Projector onto {y : D y + b = 0} through an SVD pseudo-inverse.
struct DenseProjector {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
};
DenseProjector dense_projector(const Eigen::MatrixXd& D, const Eigen::VectorXd& b);

/// Equality-constrained quadratic minimizer of w^T H w - 2 g^T w through a
/// nullspace parameterization (SVD basis), not a saddle-point solve.
Eigen::VectorXd nullspace_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                             const Eigen::MatrixXd& D, const Eigen::VectorXd& b);

/// Exact E{B^T(i) bk B^T(i)} for Gaussian regressors, evaluated entrywise
/// with the fourth-moment (Isserlis) identity. O(M_e^4 * M0^2) but exact for
/// any block layout, including non-uniform ones.
Eigen::MatrixXd elementwise_fourth_moment(const dlms::theory::ErrorRecursion& rec);

/// Monte Carlo estimate of E{B^T(i) bk B^T(i)} with per-entry standard
/// errors.
struct McMatrix {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;
};
McMatrix monte_carlo_fourth_moment(const dlms::theory::ErrorRecursion& rec, int samples,
                                   std::uint64_t seed);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracles
