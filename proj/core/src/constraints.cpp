#include "dlms/constraints.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dlms/projection.hpp"

namespace dlms {

namespace {
std::string at_constraint(int p) { return "constraint " + std::to_string(p) + ": "; }
}  // namespace

bool Constraint::involves(int agent) const {
  return std::find(members.begin(), members.end(), agent) != members.end();
}

const Eigen::MatrixXd& Constraint::block_for(int agent) const {
  auto it = std::find(members.begin(), members.end(), agent);
  if (it == members.end()) throw std::invalid_argument("agent not in constraint");
  return blocks[static_cast<size_t>(it - members.begin())];
}

int ConstraintSet::total_rows() const {
  int rows = 0;
  for (const auto& c : constraints) rows += c.rows();
  return rows;
}

std::vector<int> ConstraintSet::constraints_of(int agent) const {
  std::vector<int> out;
  for (int p = 0; p < count(); ++p)
    if (constraints[p].involves(agent)) out.push_back(p);
  return out;
}

int NetworkTopology::total_dim() const {
  return std::accumulate(dims.begin(), dims.end(), 0);
}

int NetworkTopology::offset_of(int agent) const {
  return std::accumulate(dims.begin(), dims.begin() + agent, 0);
}

NetworkTopology topology_from_constraints(const std::vector<int>& dims,
                                          const ConstraintSet& constraints) {
  NetworkTopology topology;
  topology.dims = dims;
  topology.neighbors.resize(dims.size());
  for (const auto& c : constraints.constraints)
    for (int k : c.members)
      for (int l : c.members)
        if (k != l) topology.neighbors[k].insert(l);
  return topology;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack_constraints(
    const NetworkTopology& topology, const ConstraintSet& constraints) {
  const int M = topology.total_dim();
  const int L = constraints.total_rows();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(L, M);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(L);
  int row = 0;
  for (const auto& c : constraints.constraints) {
    for (size_t j = 0; j < c.members.size(); ++j)
      D.block(row, topology.offset_of(c.members[j]), c.rows(),
              topology.dims[c.members[j]]) = c.blocks[j];
    b.segment(row, c.rows()) = c.offset;
    row += c.rows();
  }
  return {D, b};
}

void validate(const NetworkTopology& topology, const ConstraintSet& constraints,
              bool allow_unconstrained) {
  const int N = topology.num_agents();
  if (static_cast<int>(topology.neighbors.size()) != N)
    throw std::invalid_argument("topology: neighbors size mismatch");
  for (int k = 0; k < N; ++k)
    if (topology.dims[k] <= 0)
      throw std::invalid_argument("topology: agent " + std::to_string(k) +
                                  " has non-positive dimension");

  std::vector<int> membership(N, 0);
  for (int p = 0; p < constraints.count(); ++p) {
    const auto& c = constraints.constraints[p];
    if (c.members.empty()) throw std::invalid_argument(at_constraint(p) + "no members");
    if (c.members.size() != c.blocks.size())
      throw std::invalid_argument(at_constraint(p) + "members/blocks size mismatch");
    if (!std::is_sorted(c.members.begin(), c.members.end()) ||
        std::adjacent_find(c.members.begin(), c.members.end()) != c.members.end())
      throw std::invalid_argument(at_constraint(p) + "duplicate or unsorted agent membership");
    for (size_t j = 0; j < c.members.size(); ++j) {
      const int k = c.members[j];
      if (k < 0 || k >= N)
        throw std::invalid_argument(at_constraint(p) + "agent index out of range");
      if (c.blocks[j].rows() != c.rows())
        throw std::invalid_argument(at_constraint(p) + "block row count differs from offset");
      if (c.blocks[j].cols() != topology.dims[k])
        throw std::invalid_argument(at_constraint(p) + "block width differs from agent dimension");
      ++membership[k];
      // locality: every co-member must be reachable in one hop
      for (int l : c.members)
        if (l != k && !topology.neighbors[k].count(l))
          throw std::invalid_argument(at_constraint(p) + "members " + std::to_string(k) +
                                      " and " + std::to_string(l) + " are not neighbors");
    }
  }
  if (!allow_unconstrained)
    for (int k = 0; k < N; ++k)
      if (membership[k] == 0)
        throw std::invalid_argument("agent " + std::to_string(k) +
                                    " appears in no constraint");

  if (constraints.count() > 0) {
    auto [D, b] = stack_constraints(topology, constraints);
    solve_gram(D, Eigen::MatrixXd::Zero(D.rows(), 0));  // full-row-rank gate
  }
}

}  // namespace dlms
