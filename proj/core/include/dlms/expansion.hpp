#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dlms/constraints.hpp"
#include "dlms/projection.hpp"

namespace dlms {

struct SubNode {
  int agent;        // owning agent k
  int constraint;   // assigned constraint index, -1 for an unconstrained agent
  int local_index;  // m within the cluster, 0-based
};

/// Per-constraint projector onto {D_p y + b_p = 0} over the sub-nodes of that
/// constraint, with the row blocks each member needs cached.
struct ConstraintProjector {
  std::vector<int> subnodes;              // members, ascending sub-node id
  Eigen::MatrixXd matrix;                 // M_p x M_p
  Eigen::VectorXd offset;                 // M_p
  std::vector<Eigen::MatrixXd> row_block; // M_k x M_p slice per member
  std::vector<Eigen::VectorXd> offset_block;
};

/// The virtual network: every agent k is split into one sub-node per
/// constraint it belongs to; sub-nodes of one agent form a cluster coupled by
/// agreement constraints and by the cluster combination matrix.
struct ExpandedNetwork {
  NetworkTopology topology;
  ConstraintSet constraints;

  std::vector<SubNode> subnodes;              // ordered by (agent, constraint)
  std::vector<std::vector<int>> clusters;     // agent -> sub-node ids
  std::vector<std::vector<int>> constraint_members;  // constraint -> sub-node ids
  std::vector<Eigen::VectorXd> weights;       // agent -> c_k (length j_k)
  std::vector<Eigen::MatrixXd> combiners;     // agent -> A_k (j_k x j_k)

  Eigen::MatrixXd expanded_constraints;       // stacked D_e rows over sub-nodes
  Eigen::VectorXd expanded_offset;            // b
  Eigen::MatrixXd agreement_constraints;      // H: chained equality rows per cluster
  Eigen::MatrixXd projector;                  // P_e, assembled blockwise
  Eigen::VectorXd projection_offset;          // f_e
  Eigen::MatrixXd combiner;                   // diag{A_k (x) I_{M_k}}
  std::vector<ConstraintProjector> constraint_projectors;

  int num_subnodes() const { return static_cast<int>(subnodes.size()); }
  int total_dim() const;                      // M_e
  int dim_of(int subnode) const { return topology.dims[subnodes[subnode].agent]; }
  int offset_of(int subnode) const;           // start inside the stacked w_e
  int cluster_size(int agent) const { return static_cast<int>(clusters[agent].size()); }
  double weight_of(int subnode) const;        // c_{k_m}

  /// [D_e; H] and [b; 0].
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> full_constraints() const;

  /// col{ 1_{j_k} (x) v_k } for a per-agent stacked vector of dim M.
  Eigen::VectorXd replicate(const Eigen::VectorXd& per_agent) const;
  /// Per-agent average of the cluster copies (left inverse of replicate).
  Eigen::VectorXd collapse(const Eigen::VectorXd& per_subnode) const;
};

struct ExpansionOptions {
  /// Per-agent c vectors; defaults to uniform 1/j_k.
  std::optional<std::vector<Eigen::VectorXd>> weights;
  /// Per-agent combination matrices; defaults to uniform over a fully
  /// connected cluster. Must be doubly stochastic.
  std::optional<std::vector<Eigen::MatrixXd>> combiners;
  /// Accept agents outside every constraint as single-sub-node clusters with
  /// an identity projection (no rows are added to D_e).
  bool allow_unconstrained = false;
};

ExpandedNetwork expand_network(const NetworkTopology& topology,
                               const ConstraintSet& constraints,
                               const ExpansionOptions& options = {});

/// Blockwise P_e / f_e assembly: D_e D_e^T is block diagonal per constraint,
/// so the (k_m, l_n) block is nonzero only when the sub-nodes share a
/// constraint. Equals build_projector on the stacked D_e.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_projector(
    const ExpandedNetwork& expanded);

struct ConstraintViolation {
  double original;   // || D_e w_e + b ||^2
  double agreement;  // || H w_e ||^2
  double total() const { return original + agreement; }
};

/// Squared residual of the full expanded constraint set at w_e, split into
/// the original-constraint part and the cluster-agreement part.
ConstraintViolation constraint_violation(const Eigen::VectorXd& w_e,
                                         const ExpandedNetwork& expanded);

/// Vectors exchanged in one iteration: the full per-sub-node algorithm sends
/// one intermediate per sub-node to every co-constraint peer of a different
/// agent, the reduced form one per agent to every distinct peer agent.
struct MessageCount {
  long full = 0;
  long reduced = 0;
};
MessageCount per_iteration_messages(const ExpandedNetwork& expanded);

}  // namespace dlms
