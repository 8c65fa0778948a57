#include "dlms/ground_truth.hpp"

#include <stdexcept>
#include <string>

namespace dlms {

Eigen::VectorXd GroundTruth::stacked_w_opt() const {
  int M = 0;
  for (const auto& a : agents) M += static_cast<int>(a.w_opt.size());
  Eigen::VectorXd w(M);
  int off = 0;
  for (const auto& a : agents) {
    w.segment(off, a.w_opt.size()) = a.w_opt;
    off += static_cast<int>(a.w_opt.size());
  }
  return w;
}

Eigen::MatrixXd GroundTruth::stacked_covariance() const {
  int M = 0;
  for (const auto& a : agents) M += static_cast<int>(a.w_opt.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(M, M);
  int off = 0;
  for (const auto& a : agents) {
    const int d = static_cast<int>(a.w_opt.size());
    R.block(off, off, d, d) = a.covariance;
    off += d;
  }
  return R;
}

Eigen::VectorXd GroundTruth::stacked_cross_corr() const {
  Eigen::VectorXd w = stacked_w_opt();
  return stacked_covariance() * w;
}

double GroundTruth::obs_power(int agent) const {
  const auto& a = agents[agent];
  return a.w_opt.dot(a.covariance * a.w_opt) + a.noise_var;
}

Eigen::MatrixXd GroundTruth::expanded_covariance(const ExpandedNetwork& expanded) const {
  const int Me = expanded.total_dim();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(Me, Me);
  for (int s = 0; s < expanded.num_subnodes(); ++s) {
    const int d = expanded.dim_of(s);
    R.block(expanded.offset_of(s), expanded.offset_of(s), d, d) =
        expanded.weight_of(s) * agents[expanded.subnodes[s].agent].covariance;
  }
  return R;
}

Eigen::VectorXd GroundTruth::expanded_w_opt(const ExpandedNetwork& expanded) const {
  return expanded.replicate(stacked_w_opt());
}

void GroundTruth::validate(const NetworkTopology& topology) const {
  if (num_agents() != topology.num_agents())
    throw std::invalid_argument("ground truth: agent count differs from topology");
  for (int k = 0; k < num_agents(); ++k) {
    const auto& a = agents[k];
    const auto fail = [&](const std::string& why) {
      throw std::invalid_argument("agent " + std::to_string(k) + ": " + why);
    };
    if (a.w_opt.size() != topology.dims[k]) fail("w_opt dimension mismatch");
    if (a.covariance.rows() != topology.dims[k] || a.covariance.cols() != topology.dims[k])
      fail("covariance dimension mismatch");
    if ((a.covariance - a.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      fail("covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(a.covariance);
    if (llt.info() != Eigen::Success) fail("covariance not positive definite");
    if (a.noise_var < 0) fail("negative noise variance");
  }
}

Eigen::VectorXd closed_form_w_star(const GroundTruth& truth,
                                   const NetworkTopology& topology,
                                   const ConstraintSet& constraints) {
  truth.validate(topology);
  auto [D, b] = stack_constraints(topology, constraints);
  const Eigen::VectorXd w_o = truth.stacked_w_opt();
  const Eigen::MatrixXd R = truth.stacked_covariance();
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  const Eigen::MatrixXd Rinv_Dt = llt.solve(D.transpose());
  Eigen::MatrixXd S = D * Rinv_Dt;  // D R^{-1} D^T
  Eigen::LDLT<Eigen::MatrixXd> sl(S);
  const Eigen::VectorXd pivots = sl.vectorD();
  if (pivots.minCoeff() <= 1e-12 * pivots.maxCoeff())
    throw RankError("closed_form_w_star: singular Schur complement (rank-deficient constraints)",
                    0, static_cast<int>(pivots.size()));
  return w_o - Rinv_Dt * sl.solve(D * w_o + b);
}

Eigen::VectorXd closed_form_w_star_extended(const GroundTruth& truth,
                                            const ExpandedNetwork& expanded) {
  auto [D, b] = expanded.full_constraints();
  const Eigen::VectorXd w_oe = truth.expanded_w_opt(expanded);
  const Eigen::MatrixXd Re = truth.expanded_covariance(expanded);
  Eigen::LLT<Eigen::MatrixXd> llt(Re);
  const Eigen::MatrixXd Rinv_Dt = llt.solve(D.transpose());
  Eigen::MatrixXd S = D * Rinv_Dt;
  Eigen::LDLT<Eigen::MatrixXd> sl(S);
  const Eigen::VectorXd pivots = sl.vectorD();
  if (pivots.minCoeff() <= 1e-12 * pivots.maxCoeff())
    throw RankError("closed_form_w_star_extended: singular Schur complement", 0,
                    static_cast<int>(pivots.size()));
  return w_oe - Rinv_Dt * sl.solve(D * w_oe + b);
}

Eigen::VectorXd anchor_gap(const GroundTruth& truth, const ExpandedNetwork& expanded) {
  return truth.expanded_w_opt(expanded) - closed_form_w_star_extended(truth, expanded);
}

Eigen::VectorXd kkt_solve(const Eigen::MatrixXd& quadratic, const Eigen::VectorXd& linear,
                          const Eigen::MatrixXd& D, const Eigen::VectorXd& b) {
  const int M = static_cast<int>(quadratic.rows());
  const int L = static_cast<int>(D.rows());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(M + L, M + L);
  kkt.topLeftCorner(M, M) = 2.0 * quadratic;
  kkt.topRightCorner(M, L) = D.transpose();
  kkt.bottomLeftCorner(L, M) = D;
  Eigen::VectorXd rhs(M + L);
  rhs.head(M) = 2.0 * linear;
  rhs.tail(L) = -b;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible())
    throw std::runtime_error("kkt_solve: singular saddle-point system");
  Eigen::VectorXd sol = lu.solve(rhs);
  return sol.head(M);
}

}  // namespace dlms
