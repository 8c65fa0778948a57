#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "dlms/ground_truth.hpp"

namespace dlms {

/// One synchronous network observation: per-agent regressor and observation.
struct StreamSample {
  std::vector<Eigen::VectorXd> regressor;
  Eigen::VectorXd obs;
};

/// Stream addressing: draws are a pure function of
/// (seed, run, agent, iteration), so algorithms stepped on the same run see
/// identical data no matter how many values each one consumes internally.
struct RngPolicy {
  std::uint64_t seed = 0;
  std::uint64_t run = 0;
};

/// Small keyed counter generator (splitmix-style mixing) with a Box-Muller
/// normal on top. Cheap enough to instantiate once per (agent, iteration).
class CounterRng {
 public:
  CounterRng(const RngPolicy& policy, std::uint64_t agent, std::uint64_t iteration);
  explicit CounterRng(std::uint64_t key);

  std::uint64_t next_u64();
  double next_uniform();  // strictly inside (0, 1)
  double next_normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Streaming sampler for the linear model d = x^T w_opt + z with Gaussian
/// regressors; Cholesky factors of the covariances are cached up front.
class GaussianSampler {
 public:
  explicit GaussianSampler(GroundTruth truth);

  StreamSample sample(const RngPolicy& policy, long iteration) const;
  const GroundTruth& truth() const { return truth_; }

 private:
  GroundTruth truth_;
  std::vector<Eigen::MatrixXd> chol_;
};

/// Deterministic regressors (flow / field-reconstruction scenarios):
/// d_k(i) = mean_obs(k) + z_k(i) with the constant regressor attached.
struct FixedDesign {
  std::vector<Eigen::VectorXd> regressor;
  Eigen::VectorXd mean_obs;
  Eigen::VectorXd noise_var;

  StreamSample sample(const RngPolicy& policy, long iteration) const;
  int num_agents() const { return static_cast<int>(regressor.size()); }
};

/// Returns truth with w_opt replaced by w_opt + u, u entries ~ N(0, sigma^2).
/// Downstream quantities (w_star, anchor gaps) are derived, not stored, so
/// they follow automatically.
GroundTruth perturb_truth(const GroundTruth& truth, double sigma, std::uint64_t seed);

/// Piecewise-constant ground truth; algorithms are not told about changes.
template <class Design>
struct TrackingSchedule {
  Design initial;
  std::vector<std::pair<long, Design>> changes;  // (first iteration, design), ascending

  const Design& at(long iteration) const {
    const Design* current = &initial;
    for (const auto& [start, design] : changes) {
      if (iteration < start) break;
      current = &design;
    }
    return *current;
  }
};

}  // namespace dlms
