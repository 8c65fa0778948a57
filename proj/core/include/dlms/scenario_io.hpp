#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dlms/constraints.hpp"
#include "dlms/expansion.hpp"
#include "dlms/ground_truth.hpp"
#include "dlms/sampling.hpp"

namespace dlms {

/// On-disk scenario: agents (dimensions plus either a Gaussian data model or
/// a fixed design), constraint blocks as dense row-major matrices, and
/// optional cluster weight / combiner overrides.
struct ScenarioFile {
  NetworkTopology topology;
  ConstraintSet constraints;
  std::optional<GroundTruth> truth;
  std::optional<FixedDesign> design;
  ExpansionOptions expansion;
  double mu = 0.025;
};

/// Parses and validates; the first violated invariant is reported with its
/// constraint index. Throws std::invalid_argument on any problem.
ScenarioFile load_scenario(std::istream& in);
ScenarioFile load_scenario_file(const std::string& path);

void save_scenario(std::ostream& out, const ScenarioFile& scenario);
void save_scenario_file(const std::string& path, const ScenarioFile& scenario);

}  // namespace dlms
