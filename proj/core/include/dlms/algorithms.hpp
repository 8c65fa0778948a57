#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "dlms/block_kron.hpp"
#include "dlms/expansion.hpp"
#include "dlms/projection.hpp"
#include "dlms/sampling.hpp"

namespace dlms {

/// Per-sub-node estimates of the expanded network plus the two scratch
/// vectors the three-step iterations use. All sub-nodes of a cluster start
/// from the same agent initializer.
struct DiffusionState {
  Eigen::VectorXd w;    // stacked w_{k_m}, length M_e
  Eigen::VectorXd psi;  // adaptation intermediates
  Eigen::VectorXd phi;  // projection/combination intermediates
  double mu = 0.0;
};

DiffusionState make_diffusion_state(const ExpandedNetwork& expanded,
                                    const Eigen::VectorXd& w0_per_agent, double mu);

/// Per-agent estimates for the non-cooperative, centralized, and reduced
/// algorithms.
struct AgentState {
  Eigen::VectorXd w;  // stacked w_k, length M
  double mu = 0.0;
};

AgentState make_agent_state(const NetworkTopology& topology,
                            const Eigen::VectorXd& w0, double mu);

/// w_k <- w_k + mu x_k (d_k - x_k^T w_k), every agent on its own.
void nc_lms_step(AgentState& state, const StreamSample& sample,
                 const NetworkTopology& topology);

/// Centralized constrained LMS: one gradient step on the stacked model, then
/// the affine projection onto the full constraint manifold.
void clms_step(AgentState& state, const StreamSample& sample,
               const NetworkTopology& topology, const AffineProjector& projector);

/// Multitask diffusion, adapt -> project -> combine. The projection of each
/// sub-node reads only the members of its own constraint; the combination
/// reads only its own cluster.
void diffusion_apc_step(DiffusionState& state, const StreamSample& sample,
                        const ExpandedNetwork& expanded);

/// Multitask diffusion, adapt -> combine -> project. Iterates land exactly on
/// the per-constraint manifolds after every step.
void diffusion_cpc_step(DiffusionState& state, const StreamSample& sample,
                        const ExpandedNetwork& expanded);

/// One-estimate-per-agent form of the apc iteration; valid under uniform
/// cluster weights and uniform combiners over fully connected clusters, where
/// it reproduces diffusion_apc_step iterate for iterate.
void diffusion_reduced_step(AgentState& state, const StreamSample& sample,
                            const ExpandedNetwork& expanded);

/// Leaky adaptation: psi = w + mu c x (d - x^T w) - (mu/2) c eta w, written
/// into state.psi. Combined with the project/combine tail below it trades
/// data fit against an l2 penalty on the estimates.
void leaky_adapt_step(DiffusionState& state, const StreamSample& sample,
                      const ExpandedNetwork& expanded, double eta);

/// Full leaky iteration: leaky adapt, then project, then combine.
void diffusion_leaky_apc_step(DiffusionState& state, const StreamSample& sample,
                              const ExpandedNetwork& expanded, double eta);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iteration, double norm)
      : std::runtime_error("estimate norm " + std::to_string(norm) +
                           " exceeded 1e12 at iteration " + std::to_string(iteration)),
        iteration(iteration) {}
  long iteration;
};

/// Throws DivergenceError if any per-(sub-)node estimate norm exceeds 1e12.
void check_divergence(const Eigen::VectorXd& w, const BlockDims& dims, long iteration);

}  // namespace dlms
