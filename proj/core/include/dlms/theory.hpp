#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dlms/block_kron.hpp"
#include "dlms/curve.hpp"
#include "dlms/expansion.hpp"
#include "dlms/ground_truth.hpp"
#include "dlms/sampling.hpp"

namespace dlms::theory {

/// Hard cap on the state dimension of the dense variance engine; the
/// variance transition is M_e^2 x M_e^2 and grows fourth-order.
inline constexpr int kMaxVarianceDim = 64;

/// Spectral radius by power iteration (windowed geometric growth estimate so
/// complex dominant pairs settle), relative tolerance 1e-10, capped at 1e4
/// iterations.
double spectral_radius(const Eigen::MatrixXd& A, double tol = 1e-10, int max_iter = 10000);

enum class Variant {
  multitask_apc,     // adapt, project, combine  (the main distributed iteration)
  multitask_cpc,     // adapt, combine, project
  centralized_clms,  // stacked gradient step + full projection at a fusion center
  nc_lms,            // no projection, no cooperation
};

std::string variant_name(Variant v);

/// Everything the mean / variance models need about the error recursion
///   e(i+1) = left (I - mu R(i)) e(i) - mu left p(i) + drive.
struct ErrorRecursion {
  Eigen::MatrixXd left;          // combiner/projector product in front
  Eigen::MatrixXd input_moment;  // E R(i), block diagonal
  Eigen::MatrixXd noise_moment;  // E p(i) p(i)^T, block diagonal per agent
  Eigen::VectorXd drive;         // constant term of the w_opt-relative recursion
  Eigen::VectorXd drive_star;    // r'; the w_star-relative constant is -mu r'
  Eigen::VectorXd anchor_gap;    // w_opt - w_star in this space
  double mu = 0.0;
  BlockDims dims;                // one block per (sub-)node

  // Per-agent structure, needed by the exact fourth-moment construction.
  struct Agent {
    std::vector<int> blocks;     // indices into dims
    Eigen::VectorXd weights;     // c_{k_m}; all-ones when there is no expansion
    Eigen::MatrixXd covariance;  // R_{x,k}
    double noise_var;
  };
  std::vector<Agent> agents;

  int total_dim() const { return block_total(dims); }
};

/// Builds the recursion matrices of one algorithm variant on a scenario.
/// The two multitask variants live in the expanded space, the centralized and
/// non-cooperative ones in the per-agent space.
ErrorRecursion build_recursion(Variant variant, const GroundTruth& truth,
                               const ExpandedNetwork& expanded, double mu);

struct MeanModel {
  Eigen::MatrixXd transition;  // B = left (I - mu E R)
  Eigen::VectorXd drive;       // r
  Eigen::VectorXd drive_star;  // r'
  double mu = 0.0;
  double rho = 0.0;            // spectral radius of the transition

  /// Asymptotic mean error w.r.t. the per-agent optima: (I - B)^{-1} r.
  Eigen::VectorXd bias_opt() const;
  /// Asymptotic mean error w.r.t. the constrained optimum: -mu (I - B)^{-1} r'.
  Eigen::VectorXd bias_star() const;
};

MeanModel make_mean_model(const ErrorRecursion& recursion);

/// E e(i) for i = 0..horizon under E e(i+1) = B E e(i) + drive.
std::vector<Eigen::VectorXd> mean_curve(const MeanModel& model,
                                        const Eigen::VectorXd& initial_error,
                                        long horizon);
/// Same recursion with the w_star-relative constant -mu r'.
std::vector<Eigen::VectorXd> mean_curve_star(const MeanModel& model,
                                             const Eigen::VectorXd& initial_error,
                                             long horizon);

/// Small-step approximation of the fourth-moment transition: B^T bk B^T.
Eigen::MatrixXd build_F_approx(const MeanModel& model, const BlockDims& dims);

/// Exact fourth-moment transition for zero-mean Gaussian regressors with one
/// uniform block size. Throws std::invalid_argument on non-uniform blocks.
Eigen::MatrixXd build_F_exact(const ErrorRecursion& recursion);

struct VarianceModel {
  Eigen::MatrixXd transition;    // F, M_e^2 x M_e^2
  Eigen::MatrixXd noise_outer;   // G = left E{p p^T} left^T
  Eigen::MatrixXd mean_transition;
  Eigen::VectorXd drive;         // r
  double mu = 0.0;
  double rho = 0.0;              // spectral radius of F
  BlockDims dims;
};

VarianceModel make_variance_model(const ErrorRecursion& recursion,
                                  const MeanModel& mean, Eigen::MatrixXd F);

/// Weighted transient curve E ||e(i)||^2_Sigma for i = 0..horizon via the
/// accumulated recursion (initial error treated as deterministic). When
/// rho(F) >= 1 the finite-horizon curve is still produced and `stable` is
/// cleared.
struct TransientResult {
  LearningCurve curve;
  bool stable = true;
};
TransientResult transient_msd(const MeanModel& mean, const VarianceModel& variance,
                              const Eigen::VectorXd& initial_error, long horizon,
                              const Eigen::MatrixXd& metric);

/// Reference evaluation of the same curve by unrolling the one-step weighted
/// variance relation; O(horizon^2) dot products, for cross-checks.
std::vector<double> transient_msd_direct(const MeanModel& mean,
                                         const VarianceModel& variance,
                                         const Eigen::VectorXd& initial_error,
                                         long horizon, const Eigen::MatrixXd& metric);

/// Steady-state weighted deviation: bvec(Y(inf))^T (I - F)^{-1} sigma_ss,
/// computed as a linear solve. Requires rho(F) < 1.
double steady_state_msd(const MeanModel& mean, const VarianceModel& variance,
                        const Eigen::MatrixXd& metric_ss);

/// w_star-relative transient assembled from the w_opt-relative second moments
/// and the mean curve.
TransientResult star_relative_curve(const MeanModel& mean, const VarianceModel& variance,
                                    const Eigen::VectorXd& initial_error_opt,
                                    const Eigen::VectorXd& anchor_gap, long horizon,
                                    const Eigen::MatrixXd& metric);

/// Mean + variance models of a competing algorithm in one call.
std::pair<MeanModel, VarianceModel> competing_models(Variant variant,
                                                     const GroundTruth& truth,
                                                     const ExpandedNetwork& expanded,
                                                     double mu, bool exact_f = true);

/// Steady-state comparison of the two step orders under the perfect model,
/// evaluated by truncated series. zeta_pc belongs to project-then-combine,
/// zeta_cp to combine-then-project; the series share partial products so the
/// truncation tails agree.
struct OrderingComparison {
  double zeta_pc = 0.0;   // combination last
  double zeta_cp = 0.0;   // projection last
  double difference = 0.0;  // zeta_pc - zeta_cp
  double tail_bound = 0.0;
  int terms = 0;
};
OrderingComparison compare_orderings(const GroundTruth& truth,
                                     const ExpandedNetwork& expanded, double mu,
                                     const Eigen::MatrixXd& metric_ss,
                                     int max_terms = 20000, double rel_tol = 1e-12);

/// (1/N) diag{ (1/j_k) I } over sub-nodes: the network MSD metric.
Eigen::MatrixXd network_msd_metric(const ExpandedNetwork& expanded);
/// (1/N) I over the per-agent space.
Eigen::MatrixXd agent_msd_metric(const NetworkTopology& topology);

/// Affine stochastic recursion w(i+1) = T w(i) + t + Nz(i) for the
/// deterministic-regressor scenarios; z(i) has independent N(0, noise_var)
/// entries. Here the fourth-moment transition is exactly B^T bk B^T, so
/// steady state reduces to a Lyapunov equation solvable at dimensions far
/// beyond the dense variance cap.
struct AffineModel {
  Eigen::MatrixXd transition;
  Eigen::VectorXd drive;
  Eigen::MatrixXd noise_map;
  Eigen::VectorXd noise_var;
  double rho = 0.0;
};

/// Affine model of the project-then-combine iteration on a fixed design:
/// adapt with the constant regressor (plus an optional leak), project per
/// constraint, combine per cluster.
AffineModel build_fixed_regressor_model(const FixedDesign& design,
                                        const ExpandedNetwork& expanded, double mu,
                                        double eta = 0.0);

Eigen::VectorXd mean_fixed_point(const AffineModel& model);
/// Steady covariance C = T C T^T + Q by squaring (Smith) iteration.
Eigen::MatrixXd steady_covariance(const AffineModel& model, double tol = 1e-12);
/// lim E ||w(i) - anchor||^2_metric = tr(metric C) + bias^T metric bias.
double steady_msd(const AffineModel& model, const Eigen::VectorXd& anchor,
                  const Eigen::MatrixXd& metric);

}  // namespace dlms::theory
