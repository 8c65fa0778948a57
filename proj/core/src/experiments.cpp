#include "dlms/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dlms {

namespace {

int draw_index(CounterRng& rng, int n) {
  return static_cast<int>(rng.next_uniform() * n) % n;
}

double draw_uniform(CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.next_uniform();
}

// scalar coefficient from {-3,-2,-1,1,2,3}
double draw_coefficient(CounterRng& rng) {
  static const double values[] = {-3, -2, -1, 1, 2, 3};
  return values[draw_index(rng, 6)];
}

}  // namespace

ValidationScenario build_validation_scenario(std::uint64_t seed,
                                             const ValidationOptions& options) {
  const int N = options.num_agents;
  const int P = options.num_constraints;
  const int dim = options.dim;
  CounterRng rng(seed ^ 0xa110ULL);

  ValidationScenario scenario;
  scenario.mu = options.mu;
  scenario.truth.agents.resize(N);
  for (int k = 0; k < N; ++k) {
    auto& agent = scenario.truth.agents[k];
    agent.covariance = draw_uniform(rng, 0.5, 1.5) * Eigen::MatrixXd::Identity(dim, dim);
    agent.noise_var = draw_uniform(rng, 0.01, 0.1);
    agent.w_opt = Eigen::VectorXd::Zero(dim);  // feasible point filled in below
  }

  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    ConstraintSet set;
    std::vector<int> uncovered(N);
    std::iota(uncovered.begin(), uncovered.end(), 0);
    for (int p = 0; p < P; ++p) {
      const int size = std::min(N, 2 + draw_index(rng, 2));  // 2 or 3 members
      std::set<int> members;
      while (static_cast<int>(members.size()) < size) {
        if (!uncovered.empty()) {
          const int pick = draw_index(rng, static_cast<int>(uncovered.size()));
          members.insert(uncovered[pick]);
          uncovered.erase(uncovered.begin() + pick);
        } else {
          members.insert(draw_index(rng, N));
        }
      }
      Constraint c;
      c.members.assign(members.begin(), members.end());
      c.offset = Eigen::VectorXd::Constant(dim, -draw_coefficient(rng));
      for (size_t j = 0; j < c.members.size(); ++j) {
        Eigen::MatrixXd D = draw_coefficient(rng) * Eigen::MatrixXd::Identity(dim, dim);
        if (options.constraint_sigma > 0)
          for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
              D(a, b) += options.constraint_sigma * rng.next_normal();
        c.blocks.push_back(std::move(D));
      }
      set.constraints.push_back(std::move(c));
    }
    if (!uncovered.empty()) continue;  // some agent ended up outside every constraint

    scenario.topology =
        topology_from_constraints(std::vector<int>(N, dim), set);
    try {
      validate(scenario.topology, set);
    } catch (const std::exception&) {
      continue;  // rank-deficient draw, resample
    }
    scenario.constraints = std::move(set);

    // Perfect model: project a random draw onto the constraint manifold.
    auto [D, b] = stack_constraints(scenario.topology, scenario.constraints);
    AffineProjector proj = build_projector(D, b);
    Eigen::VectorXd raw(scenario.topology.total_dim());
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw(i) = rng.next_normal();
    const Eigen::VectorXd feasible = proj.project(raw);
    for (int k = 0; k < N; ++k)
      scenario.truth.agents[k].w_opt = feasible.segment(scenario.topology.offset_of(k), dim);
    return scenario;
  }
  throw std::runtime_error("build_validation_scenario: no full-rank constraint draw after retries");
}

Eigen::VectorXd FlowScenario::arc_flows(const Eigen::VectorXd& w_per_agent) const {
  Eigen::VectorXd flows(arcs.size());
  for (size_t j = 0; j < arcs.size(); ++j) {
    const int tail = arcs[j].tail;
    for (size_t slot = 0; slot < slots[tail].size(); ++slot)
      if (slots[tail][slot].first == static_cast<int>(j))
        flows(j) = w_per_agent(topology.offset_of(tail) + static_cast<int>(slot));
  }
  return flows;
}

FlowScenario build_flow_scenario(const std::vector<FlowArc>& arcs, std::uint64_t seed) {
  FlowScenario scenario;
  scenario.arcs = arcs;
  int N = 0;
  for (const auto& arc : arcs) {
    N = std::max(N, arc.tail + 1);
    N = std::max(N, arc.head + 1);
    if (arc.tail < 0 || arc.head < -1 || arc.tail == arc.head)
      throw std::invalid_argument("build_flow_scenario: malformed arc");
  }

  scenario.slots.resize(N);
  for (size_t j = 0; j < arcs.size(); ++j) {
    scenario.slots[arcs[j].tail].emplace_back(static_cast<int>(j), +1.0);
    if (arcs[j].head >= 0) scenario.slots[arcs[j].head].emplace_back(static_cast<int>(j), -1.0);
  }

  std::vector<int> dims(N);
  for (int k = 0; k < N; ++k) {
    dims[k] = static_cast<int>(scenario.slots[k].size());
    if (dims[k] == 0)
      throw std::invalid_argument("build_flow_scenario: node " + std::to_string(k + 1) +
                                  " has no incident arc");
  }

  // One antisymmetry equation per arc between estimating nodes.
  for (size_t j = 0; j < arcs.size(); ++j) {
    if (arcs[j].head < 0) continue;
    int a = arcs[j].tail, b = arcs[j].head;
    if (a > b) std::swap(a, b);
    Constraint c;
    c.members = {a, b};
    c.offset = Eigen::VectorXd::Zero(1);
    for (int member : c.members) {
      Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, dims[member]);
      for (size_t slot = 0; slot < scenario.slots[member].size(); ++slot)
        if (scenario.slots[member][slot].first == static_cast<int>(j)) row(0, slot) = 1.0;
      c.blocks.push_back(std::move(row));
    }
    scenario.constraints.constraints.push_back(std::move(c));
  }

  scenario.topology = topology_from_constraints(dims, scenario.constraints);
  validate(scenario.topology, scenario.constraints);

  CounterRng rng(seed ^ 0xf10ULL);
  scenario.sources.resize(N);
  scenario.design.noise_var.resize(N);
  for (int k = 0; k < N; ++k) {
    scenario.sources(k) = draw_uniform(rng, 0.0, 3.0);
    scenario.design.noise_var(k) = draw_uniform(rng, 0.1, 0.14);
    scenario.design.regressor.push_back(Eigen::VectorXd::Ones(dims[k]));
  }
  scenario.design.mean_obs = scenario.sources;
  return scenario;
}

FlowScenario regenerate_sources(const FlowScenario& scenario, std::uint64_t seed) {
  FlowScenario out = scenario;
  CounterRng rng(seed ^ 0xf11ULL);
  for (Eigen::Index k = 0; k < out.sources.size(); ++k)
    out.sources(k) = draw_uniform(rng, 0.0, 3.0);
  out.design.mean_obs = out.sources;
  return out;
}

std::vector<FlowArc> load_edge_list(std::istream& in) {
  std::vector<FlowArc> arcs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    long tail, head;
    if (!(ls >> tail)) continue;  // blank line
    if (!(ls >> head))
      throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                  ": expected 'tail head'");
    if (tail < 1 || head < 0)
      throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                  ": nodes are 1-based (0 names the sink)");
    arcs.push_back({static_cast<int>(tail) - 1, static_cast<int>(head) - 1});
  }
  return arcs;
}

std::vector<FlowArc> builtin_flow_topology() {
  // Reconstructed 10-node / 15-link layout with four links into the sink.
  const int D = -1;
  return {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 5}, {1, 6}, {2, 7},
          {6, 8}, {7, 9}, {8, 9}, {5, D}, {9, D}, {3, D}, {8, D}};
}

Eigen::VectorXd flow_kkt_solution(const FlowScenario& scenario) {
  const auto& topology = scenario.topology;
  const int M = topology.total_dim();
  Eigen::MatrixXd quadratic = Eigen::MatrixXd::Zero(M, M);
  Eigen::VectorXd linear = Eigen::VectorXd::Zero(M);
  for (int k = 0; k < topology.num_agents(); ++k) {
    const int d = topology.dims[k];
    const int off = topology.offset_of(k);
    quadratic.block(off, off, d, d) = Eigen::MatrixXd::Ones(d, d) +
                                      0.5 * scenario.eta * Eigen::MatrixXd::Identity(d, d);
    linear.segment(off, d) = scenario.sources(k) * Eigen::VectorXd::Ones(d);
  }
  auto [D, b] = stack_constraints(topology, scenario.constraints);
  return kkt_solve(quadratic, linear, D, b);
}

double analytic_f(double x, double y) {
  return (1.0 - x * x) * (2.0 * y * y * y - 3.0 * y * y + 1.0);
}

double analytic_g(double x, double y) {
  return -2.0 * (2.0 * y * y * y - 3.0 * y * y + 1.0) + 6.0 * (1.0 - x * x) * (2.0 * y - 1.0);
}

PoissonScenario build_poisson_scenario(int n, std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("build_poisson_scenario: n must be at least 4");
  PoissonScenario scenario;
  scenario.n = n;
  const int side = n - 2;
  const int N = side * side;
  const double delta = 1.0 / (n - 1);
  const double inv_d2 = 1.0 / (delta * delta);

  scenario.true_field.resize(N);
  scenario.slots.resize(N);
  std::vector<int> dims(N);
  scenario.design.mean_obs.resize(N);
  scenario.design.noise_var.resize(N);
  CounterRng rng(seed ^ 0x9015ULL);

  const auto interior = [&](int k, int l) { return k >= 1 && k <= side && l >= 1 && l <= side; };

  for (int l = 1; l <= side; ++l)
    for (int k = 1; k <= side; ++k) {
      const int node = scenario.node_index(k, l);
      scenario.true_field(node) = analytic_f(k * delta, l * delta);

      // Table-layout entry order: own value, then (k-1,l), (k,l-1), (k,l+1),
      // (k+1,l) when interior; boundary neighbors fold into the offset.
      std::vector<std::pair<int, int>> neighbors = {
          {k, l}, {k - 1, l}, {k, l - 1}, {k, l + 1}, {k + 1, l}};
      double boundary_sum = 0.0;
      for (const auto& [a, b] : neighbors) {
        if (interior(a, b))
          scenario.slots[node].push_back(scenario.grid_index(a, b));
        else if (!(a == k && b == l))
          boundary_sum += analytic_f(a * delta, b * delta);
      }
      dims[node] = static_cast<int>(scenario.slots[node].size());

      Eigen::VectorXd x(dims[node]);
      x(0) = -4.0 * inv_d2;
      for (int j = 1; j < dims[node]; ++j) x(j) = inv_d2;
      scenario.design.regressor.push_back(std::move(x));

      const double offset = boundary_sum * inv_d2;  // v^o
      scenario.design.mean_obs(node) = analytic_g(k * delta, l * delta) - offset;
      scenario.design.noise_var(node) = draw_uniform(rng, 0.1, 0.14);
    }

  // Pairwise equality of the two shared entries of horizontally and
  // vertically adjacent sensors; star pattern through the owner keeps the
  // stacked rows independent.
  const auto slot_of = [&](int node, int grid) {
    const auto& s = scenario.slots[node];
    return static_cast<int>(std::find(s.begin(), s.end(), grid) - s.begin());
  };
  const auto add_pair = [&](int ka, int la, int kb, int lb) {
    const int a = scenario.node_index(ka, la);
    const int b = scenario.node_index(kb, lb);
    Constraint c;
    c.members = {std::min(a, b), std::max(a, b)};
    c.offset = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd Da = Eigen::MatrixXd::Zero(2, dims[c.members[0]]);
    Eigen::MatrixXd Db = Eigen::MatrixXd::Zero(2, dims[c.members[1]]);
    const int shared[2] = {scenario.grid_index(ka, la), scenario.grid_index(kb, lb)};
    for (int r = 0; r < 2; ++r) {
      Da(r, slot_of(c.members[0], shared[r])) = 1.0;
      Db(r, slot_of(c.members[1], shared[r])) = -1.0;
    }
    c.blocks = {std::move(Da), std::move(Db)};
    scenario.constraints.constraints.push_back(std::move(c));
  };
  for (int l = 1; l <= side; ++l)
    for (int k = 1; k <= side; ++k) {
      if (k + 1 <= side) add_pair(k, l, k + 1, l);
      if (l + 1 <= side) add_pair(k, l, k, l + 1);
    }

  scenario.topology = topology_from_constraints(dims, scenario.constraints);
  validate(scenario.topology, scenario.constraints);
  return scenario;
}

Eigen::VectorXd poisson_kkt_solution(const PoissonScenario& scenario) {
  const auto& topology = scenario.topology;
  const int M = topology.total_dim();
  Eigen::MatrixXd quadratic = Eigen::MatrixXd::Zero(M, M);
  Eigen::VectorXd linear = Eigen::VectorXd::Zero(M);
  for (int k = 0; k < topology.num_agents(); ++k) {
    const int d = topology.dims[k];
    const int off = topology.offset_of(k);
    const auto& x = scenario.design.regressor[k];
    quadratic.block(off, off, d, d) = x * x.transpose();
    linear.segment(off, d) = scenario.design.mean_obs(k) * x;
  }
  auto [D, b] = stack_constraints(topology, scenario.constraints);
  return kkt_solve(quadratic, linear, D, b);
}

Eigen::VectorXd field_estimate(const PoissonScenario& scenario,
                               const ExpandedNetwork& expanded,
                               const Eigen::VectorXd& w_e) {
  const int side = scenario.n - 2;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(side * side);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(side * side);
  for (int s = 0; s < expanded.num_subnodes(); ++s) {
    const int node = expanded.subnodes[s].agent;
    const int off = expanded.offset_of(s);
    for (size_t slot = 0; slot < scenario.slots[node].size(); ++slot) {
      sum(scenario.slots[node][slot]) += w_e(off + static_cast<int>(slot));
      count(scenario.slots[node][slot]) += 1.0;
    }
  }
  return sum.array() / count.array();
}

double stencil_residual(int n) {
  const double delta = 1.0 / (n - 1);
  double worst = 0.0;
  for (int l = 1; l <= n - 2; ++l)
    for (int k = 1; k <= n - 2; ++k) {
      const double stencil =
          (-4.0 * analytic_f(k * delta, l * delta) + analytic_f((k - 1) * delta, l * delta) +
           analytic_f(k * delta, (l - 1) * delta) + analytic_f(k * delta, (l + 1) * delta) +
           analytic_f((k + 1) * delta, l * delta)) /
          (delta * delta);
      worst = std::max(worst, std::abs(stencil - analytic_g(k * delta, l * delta)));
    }
  return worst;
}

}  // namespace dlms
