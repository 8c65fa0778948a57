#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dlms/algorithms.hpp"
#include "dlms/curve.hpp"
#include "dlms/expansion.hpp"
#include "dlms/experiments.hpp"
#include "dlms/sampling.hpp"
#include "dlms/theory.hpp"

namespace dlms {

enum class Algorithm {
  nc_lms,
  centralized_clms,
  diffusion_apc,
  diffusion_cpc,
  diffusion_reduced,
  diffusion_leaky_apc,
};

std::string algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string& name);

/// One stationary stretch of a scenario: the sampling design plus the anchors
/// learning curves are measured against.
struct Segment {
  long start = 0;
  std::optional<GroundTruth> truth;   // Gaussian-regressor scenarios
  std::optional<FixedDesign> design;  // deterministic-regressor scenarios
  std::optional<Eigen::VectorXd> w_opt;  // per-agent space
  Eigen::VectorXd w_star;                // per-agent space

  bool gaussian() const { return truth.has_value(); }
};

struct Scenario {
  std::string name;
  NetworkTopology topology;
  ConstraintSet constraints;
  ExpandedNetwork expanded;
  std::vector<Segment> segments;  // ascending start, first at 0
  double mu = 0.0;
  double eta = 0.0;  // leaky variant only

  const Segment& segment_at(long iteration) const;
  bool gaussian() const { return segments.front().gaussian(); }
};

Scenario make_scenario(const ValidationScenario& validation, std::string name = "validation");
Scenario make_scenario(const FlowScenario& flow, std::string name = "flow");
/// Flow scenario with the sources regenerated at `change_at`.
Scenario make_tracking_scenario(const FlowScenario& flow, long change_at,
                                std::uint64_t regen_seed, std::string name = "flow");
Scenario make_scenario(const PoissonScenario& poisson, std::string name = "poisson");

struct RunConfig {
  std::uint64_t seed = 1;
  int runs = 1;
  long horizon = 1;
  std::vector<Algorithm> algorithms;
  bool with_theory = true;
  /// Runs per deterministic reduction block; results are independent of the
  /// thread count because blocks are reduced in order.
  int block_size = 8;
  int threads = 0;  // 0: hardware concurrency

  void validate_against(const Scenario& scenario) const;  // throws on bad config
};

struct SteadyEstimate {
  double value = 0.0;  // linear
  long burn_in = 0;
  bool detected = false;
};

/// Steady-state level of a simulated curve: burn-in is the first index where
/// the dB slope over a trailing 500-sample window drops below 1e-3 dB per
/// iteration; the level averages the last max(1000, horizon/10) samples.
SteadyEstimate steady_state_estimate(const std::vector<double>& linear_values);

struct SeriesSummary {
  std::string algorithm;
  std::string reference;  // "w_opt" or "w_star"
  int runs = 0;
  SteadyEstimate steady;
  std::optional<double> theory_steady;   // linear
  std::optional<double> max_gap_db;      // over iterations with both curves
  std::optional<ConstraintViolation> violation;  // expanded-state algorithms
};

struct EnsembleResult {
  std::vector<LearningCurve> curves;
  std::vector<SeriesSummary> summaries;
  /// Ensemble/time-averaged steady state per algorithm, per-agent space.
  std::vector<std::pair<Algorithm, Eigen::VectorXd>> mean_states;
  /// Same average in the expanded space for sub-node algorithms.
  std::vector<std::pair<Algorithm, Eigen::VectorXd>> mean_states_expanded;
};

/// Runs the Monte Carlo ensemble of every configured algorithm on shared
/// sample streams, averages the learning curves, and pairs them with theory
/// predictions where the engine supports the scenario.
EnsembleResult run_ensemble(const Scenario& scenario, const RunConfig& config);

}  // namespace dlms
