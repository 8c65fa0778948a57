#include "dlms/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dlms {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t run, std::uint64_t agent,
                         std::uint64_t iteration) {
  std::uint64_t k = mix(seed + kGamma);
  k = mix(k ^ (run + kGamma));
  k = mix(k ^ (agent + kGamma));
  k = mix(k ^ (iteration + kGamma));
  return k;
}

}  // namespace

CounterRng::CounterRng(const RngPolicy& policy, std::uint64_t agent,
                       std::uint64_t iteration)
    : key_(derive_key(policy.seed, policy.run, agent, iteration)) {}

CounterRng::CounterRng(std::uint64_t key) : key_(mix(key + kGamma)) {}

std::uint64_t CounterRng::next_u64() { return mix(key_ + kGamma * ++counter_); }

double CounterRng::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(next_uniform()));
  const double angle = 2.0 * std::numbers::pi * next_uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

GaussianSampler::GaussianSampler(GroundTruth truth) : truth_(std::move(truth)) {
  chol_.reserve(truth_.agents.size());
  for (const auto& agent : truth_.agents) {
    Eigen::LLT<Eigen::MatrixXd> llt(agent.covariance);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("GaussianSampler: covariance not positive definite");
    chol_.push_back(llt.matrixL());
  }
}

StreamSample GaussianSampler::sample(const RngPolicy& policy, long iteration) const {
  const int N = truth_.num_agents();
  StreamSample s;
  s.regressor.resize(N);
  s.obs.resize(N);
  for (int k = 0; k < N; ++k) {
    CounterRng rng(policy, static_cast<std::uint64_t>(k),
                   static_cast<std::uint64_t>(iteration));
    const auto& agent = truth_.agents[k];
    const int d = static_cast<int>(agent.w_opt.size());
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) g(i) = rng.next_normal();
    s.regressor[k] = chol_[k] * g;
    const double z = std::sqrt(agent.noise_var) * rng.next_normal();
    s.obs(k) = s.regressor[k].dot(agent.w_opt) + z;
  }
  return s;
}

StreamSample FixedDesign::sample(const RngPolicy& policy, long iteration) const {
  const int N = num_agents();
  StreamSample s;
  s.regressor = regressor;
  s.obs.resize(N);
  for (int k = 0; k < N; ++k) {
    CounterRng rng(policy, static_cast<std::uint64_t>(k),
                   static_cast<std::uint64_t>(iteration));
    s.obs(k) = mean_obs(k) + std::sqrt(noise_var(k)) * rng.next_normal();
  }
  return s;
}

GroundTruth perturb_truth(const GroundTruth& truth, double sigma, std::uint64_t seed) {
  GroundTruth out = truth;
  if (sigma == 0.0) return out;
  for (size_t k = 0; k < out.agents.size(); ++k) {
    CounterRng rng(seed ^ (0x5e21u + 31 * static_cast<std::uint64_t>(k)));
    for (Eigen::Index i = 0; i < out.agents[k].w_opt.size(); ++i)
      out.agents[k].w_opt(i) += sigma * rng.next_normal();
  }
  return out;
}

}  // namespace dlms
