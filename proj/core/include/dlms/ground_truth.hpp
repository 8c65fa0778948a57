#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dlms/constraints.hpp"
#include "dlms/expansion.hpp"

namespace dlms {

/// Data model of one agent: d_k(i) = x_k(i)^T w_opt + z_k(i) with
/// x_k ~ N(0, covariance) and z_k ~ N(0, noise_var).
struct AgentModel {
  Eigen::VectorXd w_opt;       // w_k^o
  Eigen::MatrixXd covariance;  // R_{x,k}, symmetric positive definite
  double noise_var = 0.0;      // sigma^2_{z,k}
};

struct GroundTruth {
  std::vector<AgentModel> agents;

  int num_agents() const { return static_cast<int>(agents.size()); }
  Eigen::VectorXd stacked_w_opt() const;              // w^o
  Eigen::MatrixXd stacked_covariance() const;         // R_x = diag{R_{x,k}}
  Eigen::VectorXd stacked_cross_corr() const;         // r_dx = col{R_{x,k} w_k^o}
  double obs_power(int agent) const;                  // sigma^2_{d,k}

  /// diag{C_k (x) R_{x,k}} over the expanded network.
  Eigen::MatrixXd expanded_covariance(const ExpandedNetwork& expanded) const;
  /// col{1_{j_k} (x) w_k^o}.
  Eigen::VectorXd expanded_w_opt(const ExpandedNetwork& expanded) const;

  void validate(const NetworkTopology& topology) const;
};

/// Minimizer of the constrained mean-square-error problem,
///   w* = w^o - R_x^{-1} D^T (D R_x^{-1} D^T)^{-1} (D w^o + b).
Eigen::VectorXd closed_form_w_star(const GroundTruth& truth,
                                   const NetworkTopology& topology,
                                   const ConstraintSet& constraints);

/// Same minimizer over the expanded network through [D_e; H]; equals the
/// per-agent solution replicated over each cluster.
Eigen::VectorXd closed_form_w_star_extended(const GroundTruth& truth,
                                            const ExpandedNetwork& expanded);

/// w_e^delta = w_e^o - w_e^*.
Eigen::VectorXd anchor_gap(const GroundTruth& truth, const ExpandedNetwork& expanded);

/// Equality-constrained quadratic minimizer of w^T H w - 2 g^T w subject to
/// D w + b = 0, through the saddle-point system. H only needs to be positive
/// definite on the nullspace of D.
Eigen::VectorXd kkt_solve(const Eigen::MatrixXd& quadratic, const Eigen::VectorXd& linear,
                          const Eigen::MatrixXd& D, const Eigen::VectorXd& b);

}  // namespace dlms
