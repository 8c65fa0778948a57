#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

namespace dlms {

/// One linear equality coupling a group of agents:
///   sum_j blocks[j] * w[members[j]] + offset = 0.
/// All blocks share the row count offset.size().
struct Constraint {
  std::vector<int> members;                 // agent indices, strictly increasing
  std::vector<Eigen::MatrixXd> blocks;      // rows x M_member, one per member
  Eigen::VectorXd offset;

  int rows() const { return static_cast<int>(offset.size()); }
  bool involves(int agent) const;
  const Eigen::MatrixXd& block_for(int agent) const;
};

struct ConstraintSet {
  std::vector<Constraint> constraints;

  int count() const { return static_cast<int>(constraints.size()); }
  int total_rows() const;
  /// Constraint indices (ascending) that involve the given agent.
  std::vector<int> constraints_of(int agent) const;
};

struct NetworkTopology {
  std::vector<int> dims;                    // M_k per agent
  std::vector<std::set<int>> neighbors;     // excludes the agent itself

  int num_agents() const { return static_cast<int>(dims.size()); }
  int total_dim() const;                    // M = sum M_k
  int offset_of(int agent) const;           // start of w_k inside the stacked w
};

/// Neighborhoods induced by constraint co-membership: every pair of agents
/// sharing a constraint becomes a pair of neighbors.
NetworkTopology topology_from_constraints(const std::vector<int>& dims,
                                          const ConstraintSet& constraints);

/// Stacked dense constraint matrix (total_rows x M) and offset vector.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack_constraints(
    const NetworkTopology& topology, const ConstraintSet& constraints);

/// Validates shapes, coverage (every agent in >= 1 constraint unless
/// allow_unconstrained), constraint locality w.r.t. the topology, duplicate
/// memberships, and full row rank of the stacked matrix.
/// Throws std::invalid_argument naming the first offending constraint.
void validate(const NetworkTopology& topology, const ConstraintSet& constraints,
              bool allow_unconstrained = false);

}  // namespace dlms
