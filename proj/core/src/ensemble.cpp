#include "dlms/ensemble.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace dlms {

namespace {

constexpr const char* kRefOpt = "w_opt";
constexpr const char* kRefStar = "w_star";

bool expanded_state(Algorithm a) {
  return a == Algorithm::diffusion_apc || a == Algorithm::diffusion_cpc ||
         a == Algorithm::diffusion_leaky_apc;
}

std::optional<theory::Variant> theory_variant(Algorithm a) {
  switch (a) {
    case Algorithm::nc_lms: return theory::Variant::nc_lms;
    case Algorithm::centralized_clms: return theory::Variant::centralized_clms;
    case Algorithm::diffusion_apc: return theory::Variant::multitask_apc;
    case Algorithm::diffusion_cpc: return theory::Variant::multitask_cpc;
    case Algorithm::diffusion_reduced: return theory::Variant::multitask_apc;
    case Algorithm::diffusion_leaky_apc: return std::nullopt;
  }
  return std::nullopt;
}

struct SegmentAnchors {
  Eigen::VectorXd w_opt_e, w_star_e;  // expanded space (w_opt_e empty if absent)
  Eigen::VectorXd w_opt, w_star;      // per-agent space
};

struct BlockResult {
  // [algo][ref][iteration] sums over the block's runs
  std::vector<std::array<std::vector<double>, 2>> msd;
  std::vector<Eigen::VectorXd> tail_state;  // per algo, summed tail-window averages
  int runs = 0;
};

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::nc_lms: return "nc_lms";
    case Algorithm::centralized_clms: return "centralized_clms";
    case Algorithm::diffusion_apc: return "diffusion_apc";
    case Algorithm::diffusion_cpc: return "diffusion_cpc";
    case Algorithm::diffusion_reduced: return "diffusion_reduced";
    case Algorithm::diffusion_leaky_apc: return "diffusion_leaky_apc";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
  if (name == "nc" || name == "nc_lms") return Algorithm::nc_lms;
  if (name == "clms" || name == "centralized_clms") return Algorithm::centralized_clms;
  if (name == "apc" || name == "diffusion_apc") return Algorithm::diffusion_apc;
  if (name == "cpc" || name == "diffusion_cpc") return Algorithm::diffusion_cpc;
  if (name == "reduced" || name == "diffusion_reduced") return Algorithm::diffusion_reduced;
  if (name == "leaky" || name == "diffusion_leaky_apc") return Algorithm::diffusion_leaky_apc;
  return std::nullopt;
}

const Segment& Scenario::segment_at(long iteration) const {
  const Segment* current = &segments.front();
  for (const auto& seg : segments) {
    if (iteration < seg.start) break;
    current = &seg;
  }
  return *current;
}

Scenario make_scenario(const ValidationScenario& validation, std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.topology = validation.topology;
  s.constraints = validation.constraints;
  s.expanded = expand_network(validation.topology, validation.constraints);
  s.mu = validation.mu;
  Segment seg;
  seg.truth = validation.truth;
  seg.w_opt = validation.truth.stacked_w_opt();
  seg.w_star = closed_form_w_star(validation.truth, validation.topology, validation.constraints);
  s.segments.push_back(std::move(seg));
  return s;
}

Scenario make_scenario(const FlowScenario& flow, std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.topology = flow.topology;
  s.constraints = flow.constraints;
  s.expanded = expand_network(flow.topology, flow.constraints);
  s.mu = flow.mu;
  s.eta = flow.eta;
  Segment seg;
  seg.design = flow.design;
  seg.w_star = flow_kkt_solution(flow);
  s.segments.push_back(std::move(seg));
  return s;
}

Scenario make_tracking_scenario(const FlowScenario& flow, long change_at,
                                std::uint64_t regen_seed, std::string name) {
  Scenario s = make_scenario(flow, std::move(name));
  const FlowScenario regenerated = regenerate_sources(flow, regen_seed);
  Segment seg;
  seg.start = change_at;
  seg.design = regenerated.design;
  seg.w_star = flow_kkt_solution(regenerated);
  s.segments.push_back(std::move(seg));
  return s;
}

Scenario make_scenario(const PoissonScenario& poisson, std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.topology = poisson.topology;
  s.constraints = poisson.constraints;
  s.expanded = expand_network(poisson.topology, poisson.constraints);
  s.mu = poisson.mu;
  Segment seg;
  seg.design = poisson.design;
  seg.w_star = poisson_kkt_solution(poisson);
  s.segments.push_back(std::move(seg));
  return s;
}

void RunConfig::validate_against(const Scenario& scenario) const {
  if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("config: no algorithms selected");
  for (Algorithm a : algorithms) {
    if (a == Algorithm::diffusion_leaky_apc && scenario.gaussian() && scenario.eta == 0.0)
      throw std::invalid_argument("config: leaky variant needs a scenario with a leak factor");
    (void)a;
  }
}

SteadyEstimate steady_state_estimate(const std::vector<double>& linear_values) {
  SteadyEstimate est;
  const long n = static_cast<long>(linear_values.size());
  if (n == 0) return est;
  std::vector<double> db(n);
  for (long i = 0; i < n; ++i) db[i] = 10.0 * std::log10(std::max(linear_values[i], 1e-300));

  const long window = 500;
  if (n > window) {
    // least-squares slope of the trailing window, rolled across the curve
    double sy = 0, sxy = 0;
    const double sx = (window - 1) * window / 2.0;
    const double sxx = (window - 1.0) * window * (2.0 * window - 1.0) / 6.0;
    const double denom = window * sxx - sx * sx;
    for (long i = 0; i < window; ++i) {
      sy += db[i];
      sxy += i * db[i];
    }
    for (long end = window; end <= n; ++end) {
      const double slope = (window * sxy - sx * sy) / denom;
      if (std::abs(slope) < 1e-3) {
        est.burn_in = end - 1;
        est.detected = true;
        break;
      }
      if (end == n) break;
      sxy -= sy;  // shift the window: x-coordinates slide by one
      sy -= db[end - window];
      sxy += (window - 1.0) * db[end];
      sy += db[end];
    }
  }
  const long tail = std::max<long>(1000, n / 10);
  const long first = std::max<long>(n - tail, est.detected ? est.burn_in : 0);
  double sum = 0;
  for (long i = first; i < n; ++i) sum += linear_values[i];
  est.value = sum / std::max<long>(n - first, 1);
  return est;
}

EnsembleResult run_ensemble(const Scenario& scenario, const RunConfig& config) {
  config.validate_against(scenario);
  const auto& expanded = scenario.expanded;
  const auto& topology = scenario.topology;
  const int n_algos = static_cast<int>(config.algorithms.size());
  const long horizon = config.horizon;
  const int N = topology.num_agents();
  const int M = topology.total_dim();
  const int Me = expanded.total_dim();

  // Anchors per segment, both spaces.
  std::vector<SegmentAnchors> anchors(scenario.segments.size());
  for (size_t g = 0; g < scenario.segments.size(); ++g) {
    const Segment& seg = scenario.segments[g];
    anchors[g].w_star = seg.w_star;
    anchors[g].w_star_e = expanded.replicate(seg.w_star);
    if (seg.w_opt) {
      anchors[g].w_opt = *seg.w_opt;
      anchors[g].w_opt_e = expanded.replicate(*seg.w_opt);
    }
  }
  const bool has_opt = scenario.segments.front().w_opt.has_value();
  const auto segment_index = [&](long i) {
    size_t g = 0;
    while (g + 1 < scenario.segments.size() && i >= scenario.segments[g + 1].start) ++g;
    return g;
  };

  // Metric weights: network MSD = (1/N) sum_k (1/j_k) sum_m ||err_{k_m}||^2.
  Eigen::VectorXd weight_e(Me);
  for (int s = 0; s < expanded.num_subnodes(); ++s)
    weight_e.segment(expanded.offset_of(s), expanded.dim_of(s))
        .setConstant(1.0 / (N * expanded.cluster_size(expanded.subnodes[s].agent)));

  // Shared read-only pieces.
  std::vector<std::optional<GaussianSampler>> samplers(scenario.segments.size());
  for (size_t g = 0; g < scenario.segments.size(); ++g)
    if (scenario.segments[g].truth) samplers[g].emplace(*scenario.segments[g].truth);
  std::optional<AffineProjector> full_projector;
  for (Algorithm a : config.algorithms)
    if (a == Algorithm::centralized_clms && !full_projector) {
      auto [D, b] = stack_constraints(topology, scenario.constraints);
      full_projector = build_projector(D, b);
    }
  const BlockDims agent_dims = topology.dims;
  BlockDims subnode_dims;
  for (int s = 0; s < expanded.num_subnodes(); ++s) subnode_dims.push_back(expanded.dim_of(s));

  const long tail_window = std::max<long>(std::min<long>(1000, horizon), horizon / 10);
  const long tail_first = horizon - tail_window + 1;

  const int n_blocks = (config.runs + config.block_size - 1) / config.block_size;
  std::vector<BlockResult> blocks(n_blocks);

  const auto run_block = [&](int block) {
    BlockResult& out = blocks[block];
    out.msd.resize(n_algos);
    out.tail_state.resize(n_algos);
    for (int a = 0; a < n_algos; ++a) {
      const int dim = expanded_state(config.algorithms[a]) ? Me : M;
      out.tail_state[a] = Eigen::VectorXd::Zero(dim);
      for (int r = 0; r < 2; ++r) out.msd[a][r].assign(horizon + 1, 0.0);
    }
    const int first_run = block * config.block_size;
    const int last_run = std::min(config.runs, first_run + config.block_size);
    for (int run = first_run; run < last_run; ++run) {
      const RngPolicy policy{config.seed, static_cast<std::uint64_t>(run)};
      // States, zero initialized.
      std::vector<DiffusionState> dstates(n_algos);
      std::vector<AgentState> astates(n_algos);
      for (int a = 0; a < n_algos; ++a) {
        if (expanded_state(config.algorithms[a]))
          dstates[a] = make_diffusion_state(expanded, Eigen::VectorXd::Zero(M), scenario.mu);
        else
          astates[a] = make_agent_state(topology, Eigen::VectorXd::Zero(M), scenario.mu);
      }
      const auto record = [&](long i) {
        const auto& anchor = anchors[segment_index(i)];
        for (int a = 0; a < n_algos; ++a) {
          if (expanded_state(config.algorithms[a])) {
            const Eigen::VectorXd& w = dstates[a].w;
            if (has_opt)
              out.msd[a][0][i] +=
                  (w - anchor.w_opt_e).array().square().matrix().dot(weight_e);
            out.msd[a][1][i] +=
                (w - anchor.w_star_e).array().square().matrix().dot(weight_e);
            if (i >= tail_first) out.tail_state[a] += w / tail_window;
          } else {
            const Eigen::VectorXd& w = astates[a].w;
            if (has_opt) out.msd[a][0][i] += (w - anchor.w_opt).squaredNorm() / N;
            out.msd[a][1][i] += (w - anchor.w_star).squaredNorm() / N;
            if (i >= tail_first) out.tail_state[a] += w / tail_window;
          }
        }
      };
      record(0);
      for (long i = 0; i < horizon; ++i) {
        const size_t g = segment_index(i);
        const Segment& seg = scenario.segments[g];
        const StreamSample sample = seg.gaussian() ? samplers[g]->sample(policy, i)
                                                   : seg.design->sample(policy, i);
        for (int a = 0; a < n_algos; ++a) {
          switch (config.algorithms[a]) {
            case Algorithm::nc_lms:
              nc_lms_step(astates[a], sample, topology);
              break;
            case Algorithm::centralized_clms:
              clms_step(astates[a], sample, topology, *full_projector);
              break;
            case Algorithm::diffusion_apc:
              diffusion_apc_step(dstates[a], sample, expanded);
              break;
            case Algorithm::diffusion_cpc:
              diffusion_cpc_step(dstates[a], sample, expanded);
              break;
            case Algorithm::diffusion_reduced:
              diffusion_reduced_step(astates[a], sample, expanded);
              break;
            case Algorithm::diffusion_leaky_apc:
              diffusion_leaky_apc_step(dstates[a], sample, expanded, scenario.eta);
              break;
          }
          if (expanded_state(config.algorithms[a]))
            check_divergence(dstates[a].w, subnode_dims, i);
          else
            check_divergence(astates[a].w, agent_dims, i);
        }
        record(i + 1);
      }
      ++out.runs;
    }
  };

  // Blocks fan out over threads; the reduction below walks them in index
  // order, so results do not depend on the thread count.
  {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    int n_threads = config.threads > 0 ? config.threads
                                       : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, n_blocks));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (int b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) {
          try {
            run_block(b);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            return;
          }
        }
      });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  EnsembleResult result;
  for (int a = 0; a < n_algos; ++a) {
    const Algorithm algo = config.algorithms[a];
    const int dim = expanded_state(algo) ? Me : M;
    Eigen::VectorXd mean_state = Eigen::VectorXd::Zero(dim);
    std::array<std::vector<double>, 2> curve;
    for (int r = 0; r < 2; ++r) curve[r].assign(horizon + 1, 0.0);
    for (const auto& block : blocks) {
      for (int r = 0; r < 2; ++r)
        for (long i = 0; i <= horizon; ++i) curve[r][i] += block.msd[a][r][i];
      mean_state += block.tail_state[a];
    }
    for (int r = 0; r < 2; ++r)
      for (auto& v : curve[r]) v /= config.runs;
    mean_state /= config.runs;

    if (expanded_state(algo)) {
      result.mean_states_expanded.emplace_back(algo, mean_state);
      result.mean_states.emplace_back(algo, expanded.collapse(mean_state));
    } else {
      result.mean_states.emplace_back(algo, mean_state);
      result.mean_states_expanded.emplace_back(algo, expanded.replicate(mean_state));
    }

    const std::string provenance = "simulated(runs=" + std::to_string(config.runs) + ")";
    for (int r = has_opt ? 0 : 1; r < 2; ++r) {
      LearningCurve lc;
      lc.label = algorithm_name(algo);
      lc.reference = r == 0 ? kRefOpt : kRefStar;
      lc.provenance = provenance;
      lc.values = curve[r];
      result.curves.push_back(std::move(lc));

      SeriesSummary summary;
      summary.algorithm = algorithm_name(algo);
      summary.reference = r == 0 ? kRefOpt : kRefStar;
      summary.runs = config.runs;
      summary.steady = steady_state_estimate(curve[r]);
      if (expanded_state(algo))
        summary.violation = constraint_violation(result.mean_states_expanded.back().second,
                                                 expanded);
      result.summaries.push_back(std::move(summary));
    }
  }

  if (!config.with_theory) return result;

  // Theory overlays. Gaussian scenarios get the transient engine (within the
  // dense-variance cap); deterministic-regressor scenarios get steady-state
  // predictions from the affine model.
  for (int a = 0; a < n_algos; ++a) {
    const Algorithm algo = config.algorithms[a];
    auto find_summary = [&](const std::string& ref) -> SeriesSummary& {
      for (auto& s : result.summaries)
        if (s.algorithm == algorithm_name(algo) && s.reference == ref) return s;
      throw std::logic_error("summary lookup");
    };
    if (scenario.gaussian()) {
      const auto variant = theory_variant(algo);
      if (!variant) continue;
      const GroundTruth& truth = *scenario.segments.front().truth;
      std::pair<theory::MeanModel, theory::VarianceModel> models;
      try {
        models = theory::competing_models(*variant, truth, expanded, scenario.mu);
      } catch (const std::invalid_argument&) {
        continue;  // beyond the variance cap: simulation-only series
      }
      const bool agent_space = !expanded_state(algo) ;
      const auto& anchor = anchors[0];
      const Eigen::VectorXd e0 = agent_space ? anchor.w_opt : anchor.w_opt_e;
      const Eigen::VectorXd gap = agent_space ? Eigen::VectorXd(anchor.w_opt - anchor.w_star)
                                              : Eigen::VectorXd(anchor.w_opt_e - anchor.w_star_e);
      const Eigen::MatrixXd metric = agent_space ? theory::agent_msd_metric(topology)
                                                 : theory::network_msd_metric(expanded);
      auto opt_curve = theory::transient_msd(models.first, models.second, e0, horizon, metric);
      opt_curve.curve.label = algorithm_name(algo);
      opt_curve.curve.reference = kRefOpt;
      auto star_curve = theory::star_relative_curve(models.first, models.second, e0, gap,
                                                    horizon, metric);
      star_curve.curve.label = algorithm_name(algo);
      star_curve.curve.provenance = "theory";

      const double steady_opt = opt_curve.stable
          ? theory::steady_state_msd(models.first, models.second, metric)
          : std::numeric_limits<double>::quiet_NaN();
      const Eigen::VectorXd bias = models.first.bias_opt();
      const double steady_star =
          steady_opt - 2.0 * bias.dot(metric * gap) + gap.dot(metric * gap);

      for (int r = 0; r < 2; ++r) {
        const auto& th = r == 0 ? opt_curve.curve : star_curve.curve;
        auto& summary = find_summary(r == 0 ? kRefOpt : kRefStar);
        summary.theory_steady = r == 0 ? steady_opt : steady_star;
        // gap between theory and simulation in dB, over the shared horizon
        size_t sim_index = 0;
        for (size_t c = 0; c < result.curves.size(); ++c)
          if (result.curves[c].label == th.label && result.curves[c].reference == th.reference &&
              result.curves[c].provenance != "theory")
            sim_index = c;
        const auto& sim = result.curves[sim_index];
        double gap_db = 0.0;
        for (size_t i = 0; i < sim.values.size(); ++i)
          if (sim.values[i] > 0 && th.values[i] > 0)
            gap_db = std::max(gap_db, std::abs(10.0 * std::log10(sim.values[i] / th.values[i])));
        summary.max_gap_db = gap_db;
      }
      result.curves.push_back(std::move(opt_curve.curve));
      result.curves.push_back(std::move(star_curve.curve));
    } else if (algo == Algorithm::diffusion_apc || algo == Algorithm::diffusion_leaky_apc) {
      const Segment& seg = scenario.segments.front();
      const double eta = algo == Algorithm::diffusion_leaky_apc ? scenario.eta : 0.0;
      const theory::AffineModel model =
          theory::build_fixed_regressor_model(*seg.design, expanded, scenario.mu, eta);
      if (model.rho < 1.0) {
        const Eigen::MatrixXd metric = theory::network_msd_metric(expanded);
        find_summary(kRefStar).theory_steady =
            theory::steady_msd(model, anchors[0].w_star_e, metric);
      }
    }
  }
  return result;
}

}  // namespace dlms
