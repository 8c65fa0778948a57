#include "dlms/algorithms.hpp"

namespace dlms {

namespace {

// psi_{k_m} = w_{k_m} + mu c_{k_m} x_k (d_k - x_k^T w_{k_m})
void adapt(DiffusionState& state, const StreamSample& sample,
           const ExpandedNetwork& expanded) {
  for (int s = 0; s < expanded.num_subnodes(); ++s) {
    const int k = expanded.subnodes[s].agent;
    const int off = expanded.offset_of(s);
    const int d = expanded.dim_of(s);
    const auto w = state.w.segment(off, d);
    const auto& x = sample.regressor[k];
    const double err = sample.obs(k) - x.dot(w);
    state.psi.segment(off, d) = w + state.mu * expanded.weight_of(s) * err * x;
  }
}

// out_{k_m} = [P_p]_{k_m,.} col{in_{l_n}}_{l_n in constraint p} - [f_p]_{k_m}
void project(const Eigen::VectorXd& in, Eigen::VectorXd& out,
             const ExpandedNetwork& expanded) {
  for (const auto& proj : expanded.constraint_projectors) {
    Eigen::VectorXd gathered(proj.matrix.rows());
    int pos = 0;
    for (int s : proj.subnodes) {
      gathered.segment(pos, expanded.dim_of(s)) = in.segment(expanded.offset_of(s), expanded.dim_of(s));
      pos += expanded.dim_of(s);
    }
    for (size_t m = 0; m < proj.subnodes.size(); ++m) {
      const int s = proj.subnodes[m];
      out.segment(expanded.offset_of(s), expanded.dim_of(s)) =
          proj.row_block[m] * gathered - proj.offset_block[m];
    }
  }
  // unconstrained sub-nodes pass through
  for (int s = 0; s < expanded.num_subnodes(); ++s)
    if (expanded.subnodes[s].constraint < 0)
      out.segment(expanded.offset_of(s), expanded.dim_of(s)) =
          in.segment(expanded.offset_of(s), expanded.dim_of(s));
}

// out_{k_m} = sum_n a_{k_n,k_m} in_{k_n} within each cluster
void combine(const Eigen::VectorXd& in, Eigen::VectorXd& out,
             const ExpandedNetwork& expanded) {
  for (int k = 0; k < expanded.topology.num_agents(); ++k) {
    const auto& cluster = expanded.clusters[k];
    const auto& A = expanded.combiners[k];
    const int d = expanded.topology.dims[k];
    for (size_t m = 0; m < cluster.size(); ++m) {
      auto acc = out.segment(expanded.offset_of(cluster[m]), d);
      acc.setZero();
      for (size_t n = 0; n < cluster.size(); ++n)
        acc += A(n, m) * in.segment(expanded.offset_of(cluster[n]), d);
    }
  }
}

}  // namespace

DiffusionState make_diffusion_state(const ExpandedNetwork& expanded,
                                    const Eigen::VectorXd& w0_per_agent, double mu) {
  DiffusionState state;
  state.w = expanded.replicate(w0_per_agent);
  state.psi = Eigen::VectorXd::Zero(state.w.size());
  state.phi = Eigen::VectorXd::Zero(state.w.size());
  state.mu = mu;
  return state;
}

AgentState make_agent_state(const NetworkTopology& topology, const Eigen::VectorXd& w0,
                            double mu) {
  if (w0.size() != topology.total_dim())
    throw std::invalid_argument("make_agent_state: initializer dimension mismatch");
  return AgentState{w0, mu};
}

void nc_lms_step(AgentState& state, const StreamSample& sample,
                 const NetworkTopology& topology) {
  for (int k = 0; k < topology.num_agents(); ++k) {
    auto w = state.w.segment(topology.offset_of(k), topology.dims[k]);
    const auto& x = sample.regressor[k];
    w += state.mu * (sample.obs(k) - x.dot(w)) * x;
  }
}

void clms_step(AgentState& state, const StreamSample& sample,
               const NetworkTopology& topology, const AffineProjector& projector) {
  if (projector.matrix.rows() != state.w.size())
    throw std::invalid_argument("clms_step: projector dimension mismatch");
  Eigen::VectorXd adapted = state.w;
  for (int k = 0; k < topology.num_agents(); ++k) {
    auto w = adapted.segment(topology.offset_of(k), topology.dims[k]);
    const auto& x = sample.regressor[k];
    w += state.mu * (sample.obs(k) - x.dot(w)) * x;
  }
  state.w = projector.project(adapted);
}

void diffusion_apc_step(DiffusionState& state, const StreamSample& sample,
                        const ExpandedNetwork& expanded) {
  adapt(state, sample, expanded);
  project(state.psi, state.phi, expanded);
  combine(state.phi, state.w, expanded);
}

void diffusion_cpc_step(DiffusionState& state, const StreamSample& sample,
                        const ExpandedNetwork& expanded) {
  adapt(state, sample, expanded);
  combine(state.psi, state.phi, expanded);
  project(state.phi, state.w, expanded);
}

void diffusion_reduced_step(AgentState& state, const StreamSample& sample,
                            const ExpandedNetwork& expanded) {
  const auto& topology = expanded.topology;
  Eigen::VectorXd psi = state.w;
  for (int k = 0; k < topology.num_agents(); ++k) {
    auto w = psi.segment(topology.offset_of(k), topology.dims[k]);
    const auto& x = sample.regressor[k];
    w += (state.mu / expanded.cluster_size(k)) * (sample.obs(k) - x.dot(w)) * x;
  }
  // Project the per-agent intermediates once per constraint a cluster touches,
  // then average the cluster copies.
  Eigen::VectorXd next = Eigen::VectorXd::Zero(state.w.size());
  for (const auto& proj : expanded.constraint_projectors) {
    Eigen::VectorXd gathered(proj.matrix.rows());
    int pos = 0;
    for (int s : proj.subnodes) {
      const int agent = expanded.subnodes[s].agent;
      gathered.segment(pos, topology.dims[agent]) =
          psi.segment(topology.offset_of(agent), topology.dims[agent]);
      pos += topology.dims[agent];
    }
    for (size_t m = 0; m < proj.subnodes.size(); ++m) {
      const int agent = expanded.subnodes[proj.subnodes[m]].agent;
      next.segment(topology.offset_of(agent), topology.dims[agent]) +=
          (proj.row_block[m] * gathered - proj.offset_block[m]) /
          expanded.cluster_size(agent);
    }
  }
  for (int k = 0; k < topology.num_agents(); ++k)
    if (expanded.constraints.constraints_of(k).empty())
      next.segment(topology.offset_of(k), topology.dims[k]) =
          psi.segment(topology.offset_of(k), topology.dims[k]);
  state.w = next;
}

void leaky_adapt_step(DiffusionState& state, const StreamSample& sample,
                      const ExpandedNetwork& expanded, double eta) {
  for (int s = 0; s < expanded.num_subnodes(); ++s) {
    const int k = expanded.subnodes[s].agent;
    const int off = expanded.offset_of(s);
    const int d = expanded.dim_of(s);
    const auto w = state.w.segment(off, d);
    const auto& x = sample.regressor[k];
    const double c = expanded.weight_of(s);
    const double err = sample.obs(k) - x.dot(w);
    state.psi.segment(off, d) = w + state.mu * c * err * x - 0.5 * state.mu * c * eta * w;
  }
}

void diffusion_leaky_apc_step(DiffusionState& state, const StreamSample& sample,
                              const ExpandedNetwork& expanded, double eta) {
  leaky_adapt_step(state, sample, expanded, eta);
  project(state.psi, state.phi, expanded);
  combine(state.phi, state.w, expanded);
}

void check_divergence(const Eigen::VectorXd& w, const BlockDims& dims, long iteration) {
  int off = 0;
  for (int d : dims) {
    const double n = w.segment(off, d).norm();
    if (!(n <= 1e12)) throw DivergenceError(iteration, n);
    off += d;
  }
}

}  // namespace dlms
