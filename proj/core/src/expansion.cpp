#include "dlms/expansion.hpp"

#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace dlms {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_doubly_stochastic(const Eigen::MatrixXd& A, int agent) {
  const auto fail = [&](const std::string& why) {
    throw std::invalid_argument("combiner of agent " + std::to_string(agent) + " " + why);
  };
  if (A.rows() != A.cols()) fail("is not square");
  if ((A.array() < -kStochasticTol).any()) fail("has negative entries");
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (std::abs(A.row(i).sum() - 1.0) > 1e-9) fail("has a row not summing to 1");
    if (std::abs(A.col(i).sum() - 1.0) > 1e-9) fail("has a column not summing to 1");
  }
}

}  // namespace

int ExpandedNetwork::total_dim() const {
  int d = 0;
  for (const auto& s : subnodes) d += topology.dims[s.agent];
  return d;
}

int ExpandedNetwork::offset_of(int subnode) const {
  int off = 0;
  for (int s = 0; s < subnode; ++s) off += topology.dims[subnodes[s].agent];
  return off;
}

double ExpandedNetwork::weight_of(int subnode) const {
  const auto& s = subnodes[subnode];
  return weights[s.agent](s.local_index);
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> ExpandedNetwork::full_constraints() const {
  const int Me = total_dim();
  const int Ld = static_cast<int>(expanded_constraints.rows());
  const int Lh = static_cast<int>(agreement_constraints.rows());
  Eigen::MatrixXd D(Ld + Lh, Me);
  D.topRows(Ld) = expanded_constraints;
  D.bottomRows(Lh) = agreement_constraints;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Ld + Lh);
  b.head(Ld) = expanded_offset;
  return {D, b};
}

Eigen::VectorXd ExpandedNetwork::replicate(const Eigen::VectorXd& per_agent) const {
  Eigen::VectorXd out(total_dim());
  for (int s = 0; s < num_subnodes(); ++s)
    out.segment(offset_of(s), dim_of(s)) =
        per_agent.segment(topology.offset_of(subnodes[s].agent), dim_of(s));
  return out;
}

Eigen::VectorXd ExpandedNetwork::collapse(const Eigen::VectorXd& per_subnode) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(topology.total_dim());
  for (int s = 0; s < num_subnodes(); ++s)
    out.segment(topology.offset_of(subnodes[s].agent), dim_of(s)) +=
        per_subnode.segment(offset_of(s), dim_of(s)) / cluster_size(subnodes[s].agent);
  return out;
}

ExpandedNetwork expand_network(const NetworkTopology& topology,
                               const ConstraintSet& constraints,
                               const ExpansionOptions& options) {
  validate(topology, constraints, options.allow_unconstrained);

  ExpandedNetwork net;
  net.topology = topology;
  net.constraints = constraints;
  const int N = topology.num_agents();
  const int P = constraints.count();

  // Sub-node ordering contract: agent index, then ascending constraint index.
  net.clusters.resize(N);
  net.constraint_members.resize(P);
  for (int k = 0; k < N; ++k) {
    auto owned = constraints.constraints_of(k);
    if (owned.empty()) owned.push_back(-1);  // allow_unconstrained path
    for (size_t m = 0; m < owned.size(); ++m) {
      const int id = net.num_subnodes();
      net.subnodes.push_back({k, owned[m], static_cast<int>(m)});
      net.clusters[k].push_back(id);
      if (owned[m] >= 0) net.constraint_members[owned[m]].push_back(id);
    }
  }

  // Cluster weights c_k and combination matrices A_k.
  net.weights.resize(N);
  net.combiners.resize(N);
  for (int k = 0; k < N; ++k) {
    const int j = net.cluster_size(k);
    if (options.weights) {
      const auto& c = (*options.weights)[k];
      if (c.size() != j) throw std::invalid_argument("weights of agent " + std::to_string(k) +
                                                     " have wrong length");
      if ((c.array() <= 0).any() || std::abs(c.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("weights of agent " + std::to_string(k) +
                                    " must be positive and sum to 1");
      net.weights[k] = c;
    } else {
      net.weights[k] = Eigen::VectorXd::Constant(j, 1.0 / j);
    }
    if (options.combiners) {
      net.combiners[k] = (*options.combiners)[k];
      if (net.combiners[k].rows() != j)
        throw std::invalid_argument("combiner of agent " + std::to_string(k) +
                                    " has wrong size");
    } else {
      net.combiners[k] = Eigen::MatrixXd::Constant(j, j, 1.0 / j);
    }
    check_doubly_stochastic(net.combiners[k], k);
  }

  const int Me = net.total_dim();

  // Expanded constraint matrix D_e: the rows of each constraint land on the
  // columns of its own sub-nodes only.
  net.expanded_constraints = Eigen::MatrixXd::Zero(constraints.total_rows(), Me);
  net.expanded_offset = Eigen::VectorXd::Zero(constraints.total_rows());
  int row = 0;
  for (int p = 0; p < P; ++p) {
    const auto& c = constraints.constraints[p];
    for (int s : net.constraint_members[p]) {
      const int agent = net.subnodes[s].agent;
      net.expanded_constraints.block(row, net.offset_of(s), c.rows(), topology.dims[agent]) =
          c.block_for(agent);
    }
    net.expanded_offset.segment(row, c.rows()) = c.offset;
    row += c.rows();
  }

  // Agreement rows: w_{k_m} - w_{k_{m+1}} = 0 chained within each cluster.
  int agree_rows = 0;
  for (int k = 0; k < N; ++k) agree_rows += (net.cluster_size(k) - 1) * topology.dims[k];
  net.agreement_constraints = Eigen::MatrixXd::Zero(agree_rows, Me);
  row = 0;
  for (int k = 0; k < N; ++k) {
    const int Mk = topology.dims[k];
    for (int m = 0; m + 1 < net.cluster_size(k); ++m) {
      net.agreement_constraints.block(row, net.offset_of(net.clusters[k][m]), Mk, Mk) =
          Eigen::MatrixXd::Identity(Mk, Mk);
      net.agreement_constraints.block(row, net.offset_of(net.clusters[k][m + 1]), Mk, Mk) =
          -Eigen::MatrixXd::Identity(Mk, Mk);
      row += Mk;
    }
  }

  // Global combiner diag{A_k (x) I_{M_k}}.
  net.combiner = Eigen::MatrixXd::Zero(Me, Me);
  for (int k = 0; k < N; ++k) {
    const int Mk = topology.dims[k];
    const auto& cluster = net.clusters[k];
    for (size_t a = 0; a < cluster.size(); ++a)
      for (size_t b = 0; b < cluster.size(); ++b)
        net.combiner.block(net.offset_of(cluster[a]), net.offset_of(cluster[b]), Mk, Mk) =
            net.combiners[k](a, b) * Eigen::MatrixXd::Identity(Mk, Mk);
  }

  // Per-constraint projectors with cached member row blocks.
  net.constraint_projectors.resize(P);
  for (int p = 0; p < P; ++p) {
    const auto& c = constraints.constraints[p];
    auto& proj = net.constraint_projectors[p];
    proj.subnodes = net.constraint_members[p];
    int Mp = 0;
    for (int s : proj.subnodes) Mp += net.dim_of(s);
    Eigen::MatrixXd Dp(c.rows(), Mp);
    int col = 0;
    for (int s : proj.subnodes) {
      Dp.middleCols(col, net.dim_of(s)) = c.block_for(net.subnodes[s].agent);
      col += net.dim_of(s);
    }
    AffineProjector ap = build_projector(Dp, c.offset);
    proj.matrix = ap.matrix;
    proj.offset = ap.offset;
    col = 0;
    for (int s : proj.subnodes) {
      proj.row_block.push_back(proj.matrix.middleRows(col, net.dim_of(s)));
      proj.offset_block.push_back(proj.offset.segment(col, net.dim_of(s)));
      col += net.dim_of(s);
    }
  }

  auto [Pe, fe] = assemble_projector(net);
  net.projector = std::move(Pe);
  net.projection_offset = std::move(fe);
  return net;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_projector(
    const ExpandedNetwork& expanded) {
  const int Me = expanded.total_dim();
  Eigen::MatrixXd Pe = Eigen::MatrixXd::Identity(Me, Me);
  Eigen::VectorXd fe = Eigen::VectorXd::Zero(Me);
  for (const auto& proj : expanded.constraint_projectors) {
    // Scatter the per-constraint projector into the sub-node blocks; the
    // identity elsewhere is already in place (unconstrained directions).
    int r = 0;
    for (size_t a = 0; a < proj.subnodes.size(); ++a) {
      const int sa = proj.subnodes[a];
      const int da = expanded.dim_of(sa);
      int ccol = 0;
      for (size_t b = 0; b < proj.subnodes.size(); ++b) {
        const int sb = proj.subnodes[b];
        const int db = expanded.dim_of(sb);
        Pe.block(expanded.offset_of(sa), expanded.offset_of(sb), da, db) =
            proj.matrix.block(r, ccol, da, db);
        ccol += db;
      }
      fe.segment(expanded.offset_of(sa), da) = proj.offset.segment(r, da);
      r += da;
    }
  }
  return {Pe, fe};
}

ConstraintViolation constraint_violation(const Eigen::VectorXd& w_e,
                                         const ExpandedNetwork& expanded) {
  ConstraintViolation v;
  v.original = (expanded.expanded_constraints * w_e + expanded.expanded_offset).squaredNorm();
  v.agreement = (expanded.agreement_constraints * w_e).squaredNorm();
  return v;
}

MessageCount per_iteration_messages(const ExpandedNetwork& expanded) {
  MessageCount out;
  const int N = expanded.topology.num_agents();
  std::vector<std::set<int>> peer_agents(N);
  for (const auto& proj : expanded.constraint_projectors)
    for (int s : proj.subnodes)
      for (int t : proj.subnodes) {
        const int ka = expanded.subnodes[s].agent;
        const int kb = expanded.subnodes[t].agent;
        if (ka != kb) {
          ++out.full;  // sub-node s sends its intermediate to sub-node t
          peer_agents[ka].insert(kb);
        }
      }
  for (int k = 0; k < N; ++k) out.reduced += static_cast<long>(peer_agents[k].size());
  return out;
}

}  // namespace dlms
