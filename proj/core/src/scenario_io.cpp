#include "dlms/scenario_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dlms {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw std::invalid_argument(what + ": expected an array of rows");
  const size_t cols = j.front().size();
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != cols) throw std::invalid_argument(what + ": ragged rows");
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

ScenarioFile load_scenario(std::istream& in) {
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }

  ScenarioFile out;
  if (!root.contains("agents") || !root["agents"].is_array() || root["agents"].empty())
    throw std::invalid_argument("scenario: missing agents array");

  const auto& agents = root["agents"];
  const bool gaussian = agents.front().contains("covariance");
  std::vector<int> dims;
  if (gaussian) out.truth.emplace();
  else out.design.emplace();
  for (size_t k = 0; k < agents.size(); ++k) {
    const auto& a = agents[k];
    const std::string who = "agent " + std::to_string(k);
    if (gaussian) {
      AgentModel model;
      model.w_opt = vector_from_json(a.at("w_opt"), who + " w_opt");
      model.covariance = matrix_from_json(a.at("covariance"), who + " covariance");
      model.noise_var = a.at("noise_var").get<double>();
      dims.push_back(static_cast<int>(model.w_opt.size()));
      out.truth->agents.push_back(std::move(model));
    } else {
      out.design->regressor.push_back(vector_from_json(a.at("regressor"), who + " regressor"));
      dims.push_back(static_cast<int>(out.design->regressor.back().size()));
    }
  }
  if (!gaussian) {
    out.design->mean_obs.resize(agents.size());
    out.design->noise_var.resize(agents.size());
    for (size_t k = 0; k < agents.size(); ++k) {
      out.design->mean_obs(k) = agents[k].at("mean_obs").get<double>();
      out.design->noise_var(k) = agents[k].at("noise_var").get<double>();
    }
  }

  for (const auto& cj : root.at("constraints")) {
    Constraint c;
    for (const auto& m : cj.at("members")) c.members.push_back(m.get<int>());
    c.offset = vector_from_json(cj.at("offset"), "constraint offset");
    for (const auto& bj : cj.at("blocks")) c.blocks.push_back(matrix_from_json(bj, "block"));
    out.constraints.constraints.push_back(std::move(c));
  }

  if (root.contains("neighbors")) {
    out.topology.dims = dims;
    out.topology.neighbors.resize(dims.size());
    const auto& nj = root["neighbors"];
    if (nj.size() != dims.size())
      throw std::invalid_argument("scenario: neighbors array size mismatch");
    for (size_t k = 0; k < nj.size(); ++k)
      for (const auto& n : nj[k]) out.topology.neighbors[k].insert(n.get<int>());
  } else {
    out.topology = topology_from_constraints(dims, out.constraints);
  }

  if (root.contains("weights")) {
    std::vector<Eigen::VectorXd> weights;
    for (const auto& wj : root["weights"]) weights.push_back(vector_from_json(wj, "weights"));
    out.expansion.weights = std::move(weights);
  }
  if (root.contains("combiners")) {
    std::vector<Eigen::MatrixXd> combiners;
    for (const auto& aj : root["combiners"])
      combiners.push_back(matrix_from_json(aj, "combiner"));
    out.expansion.combiners = std::move(combiners);
  }
  if (root.contains("mu")) out.mu = root["mu"].get<double>();

  validate(out.topology, out.constraints, out.expansion.allow_unconstrained);
  if (out.truth) out.truth->validate(out.topology);
  return out;
}

ScenarioFile load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open " + path);
  return load_scenario(in);
}

void save_scenario(std::ostream& out, const ScenarioFile& scenario) {
  json root;
  json agents = json::array();
  for (int k = 0; k < scenario.topology.num_agents(); ++k) {
    json a;
    if (scenario.truth) {
      a["w_opt"] = vector_to_json(scenario.truth->agents[k].w_opt);
      a["covariance"] = matrix_to_json(scenario.truth->agents[k].covariance);
      a["noise_var"] = scenario.truth->agents[k].noise_var;
    } else {
      a["regressor"] = vector_to_json(scenario.design->regressor[k]);
      a["mean_obs"] = scenario.design->mean_obs(k);
      a["noise_var"] = scenario.design->noise_var(k);
    }
    agents.push_back(std::move(a));
  }
  root["agents"] = std::move(agents);

  json constraints = json::array();
  for (const auto& c : scenario.constraints.constraints) {
    json cj;
    cj["members"] = c.members;
    cj["offset"] = vector_to_json(c.offset);
    json blocks = json::array();
    for (const auto& b : c.blocks) blocks.push_back(matrix_to_json(b));
    cj["blocks"] = std::move(blocks);
    constraints.push_back(std::move(cj));
  }
  root["constraints"] = std::move(constraints);

  json neighbors = json::array();
  for (const auto& n : scenario.topology.neighbors)
    neighbors.push_back(std::vector<int>(n.begin(), n.end()));
  root["neighbors"] = std::move(neighbors);

  if (scenario.expansion.weights) {
    json weights = json::array();
    for (const auto& w : *scenario.expansion.weights) weights.push_back(vector_to_json(w));
    root["weights"] = std::move(weights);
  }
  if (scenario.expansion.combiners) {
    json combiners = json::array();
    for (const auto& a : *scenario.expansion.combiners) combiners.push_back(matrix_to_json(a));
    root["combiners"] = std::move(combiners);
  }
  root["mu"] = scenario.mu;
  out << root.dump(2) << "\n";
}

void save_scenario_file(const std::string& path, const ScenarioFile& scenario) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("scenario: cannot write " + path);
  save_scenario(out, scenario);
}

}  // namespace dlms
