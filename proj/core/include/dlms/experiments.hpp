#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlms/constraints.hpp"
#include "dlms/expansion.hpp"
#include "dlms/ground_truth.hpp"
#include "dlms/sampling.hpp"
#include "dlms/theory.hpp"

namespace dlms {

/// Randomly constrained estimation network used to check the transient and
/// steady-state models: isotropic Gaussian regressors per agent, scaled
/// identity constraint blocks, and a constraint-induced topology.
struct ValidationScenario {
  NetworkTopology topology;
  ConstraintSet constraints;
  GroundTruth truth;  // perfect model: w_opt satisfies the constraints
  double mu = 0.025;
};

struct ValidationOptions {
  int num_agents = 15;
  int num_constraints = 9;
  int dim = 2;
  double mu = 0.025;
  /// Standard deviation of a dense perturbation added to the scaled-identity
  /// constraint blocks (0 keeps them diagonal).
  double constraint_sigma = 0.0;
  int max_retries = 64;
};

ValidationScenario build_validation_scenario(std::uint64_t seed,
                                             const ValidationOptions& options = {});

/// Minimum-cost flow estimation over a directed arc network with one
/// absorbing sink. Arcs are held positively by their tail node and negatively
/// by their head; the sink (node 0 in edge lists) estimates nothing.
struct FlowArc {
  int tail = 0;  // 0-based estimating node
  int head = 0;  // 0-based estimating node, or -1 for the sink
};

struct FlowScenario {
  std::vector<FlowArc> arcs;
  NetworkTopology topology;
  ConstraintSet constraints;  // one antisymmetry pair equation per internal arc
  FixedDesign design;         // all-ones regressors, mean observation = source
  Eigen::VectorXd sources;    // s_k
  double mu = 0.2;
  double eta = 0.002;
  std::vector<std::vector<std::pair<int, double>>> slots;  // node -> (arc, sign)

  /// Per-arc flow read out of a per-agent estimate (tail copy).
  Eigen::VectorXd arc_flows(const Eigen::VectorXd& w_per_agent) const;
};

FlowScenario build_flow_scenario(const std::vector<FlowArc>& arcs, std::uint64_t seed);

/// Regenerates the external sources (tracking experiment).
FlowScenario regenerate_sources(const FlowScenario& scenario, std::uint64_t seed);

/// "tail head" pairs, 1-based, one per line; 0 names the sink.
std::vector<FlowArc> load_edge_list(std::istream& in);
std::vector<FlowArc> builtin_flow_topology();  // 10 nodes, 1 sink, 15 links

/// eta-regularized quadratic oracle: minimize
///   sum_k (s_k - 1^T w_k)^2 + (eta/2)||w_k||^2  s.t. antisymmetry.
Eigen::VectorXd flow_kkt_solution(const FlowScenario& scenario);

/// Field reconstruction on an n x n grid: every interior sensor estimates its
/// own field value and those of its grid neighbors; shared entries are pinned
/// equal by pairwise two-row constraints.
struct PoissonScenario {
  int n = 9;
  NetworkTopology topology;  // (n-2)^2 sensor nodes
  ConstraintSet constraints;
  FixedDesign design;        // constant stencil regressors
  Eigen::VectorXd true_field;  // analytic f at the interior grid points
  double mu = 7e-5;
  std::vector<std::vector<int>> slots;  // node -> interior grid point per entry

  int node_index(int k, int l) const { return (l - 1) * (n - 2) + (k - 1); }
  int grid_index(int k, int l) const { return node_index(k, l); }
};

double analytic_f(double x, double y);
double analytic_g(double x, double y);

PoissonScenario build_poisson_scenario(int n, std::uint64_t seed);

/// Constrained quadratic oracle of the reconstruction problem (all copies of
/// a grid value equal, squared data misfit minimized).
Eigen::VectorXd poisson_kkt_solution(const PoissonScenario& scenario);

/// Field estimate per interior grid point: the average over every sub-node
/// entry that holds a copy of that point.
Eigen::VectorXd field_estimate(const PoissonScenario& scenario,
                               const ExpandedNetwork& expanded,
                               const Eigen::VectorXd& w_e);

/// Max residual of the five-point stencil applied to the analytic field,
/// against the analytic right-hand side at every interior grid point.
double stencil_residual(int n);

}  // namespace dlms
