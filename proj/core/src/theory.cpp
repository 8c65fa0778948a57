#include "dlms/theory.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#include "dlms/sampling.hpp"

namespace dlms::theory {

namespace {

Eigen::VectorXd seeded_unit_vector(Eigen::Index n) {
  CounterRng rng(0x5eedu);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.next_normal();
  return v.normalized();
}

void require_stable(double rho, const std::string& who) {
  if (!(rho < 1.0))
    throw std::runtime_error(who + ": transition is not stable (spectral radius " +
                             std::to_string(rho) + ")");
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& A, double tol, int max_iter) {
  if (A.rows() != A.cols()) throw std::invalid_argument("spectral_radius: square matrix required");
  const Eigen::Index n = A.rows();
  if (n == 0) return 0.0;
  Eigen::VectorXd v = seeded_unit_vector(n);
  constexpr int kWindow = 16;
  std::deque<double> growth;
  double estimate = 0.0;
  double previous = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = A * v;
    const double g = w.norm();
    if (g < 1e-300) return 0.0;
    v = w / g;
    growth.push_back(std::log(g));
    if (growth.size() > kWindow) growth.pop_front();
    double mean = 0.0;
    for (double x : growth) mean += x;
    mean /= static_cast<double>(growth.size());
    estimate = std::exp(mean);
    if (growth.size() == kWindow && it % kWindow == kWindow - 1) {
      if (previous >= 0.0 && std::abs(estimate - previous) <= tol * std::max(estimate, 1e-30))
        return estimate;
      previous = estimate;
    }
  }
  return estimate;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::multitask_apc: return "multitask_apc";
    case Variant::multitask_cpc: return "multitask_cpc";
    case Variant::centralized_clms: return "centralized_clms";
    case Variant::nc_lms: return "nc_lms";
  }
  return "unknown";
}

ErrorRecursion build_recursion(Variant variant, const GroundTruth& truth,
                               const ExpandedNetwork& expanded, double mu) {
  ErrorRecursion rec;
  rec.mu = mu;
  const auto& topology = expanded.topology;
  const int N = topology.num_agents();

  if (variant == Variant::multitask_apc || variant == Variant::multitask_cpc) {
    const int Me = expanded.total_dim();
    rec.dims.reserve(expanded.num_subnodes());
    for (int s = 0; s < expanded.num_subnodes(); ++s) rec.dims.push_back(expanded.dim_of(s));

    const Eigen::MatrixXd At = expanded.combiner.transpose();
    const Eigen::MatrixXd& Pe = expanded.projector;
    rec.left = (variant == Variant::multitask_apc) ? Eigen::MatrixXd(At * Pe)
                                                   : Eigen::MatrixXd(Pe * At);
    rec.input_moment = truth.expanded_covariance(expanded);

    rec.noise_moment = Eigen::MatrixXd::Zero(Me, Me);
    for (int k = 0; k < N; ++k) {
      const auto& cluster = expanded.clusters[k];
      const auto& agent = truth.agents[k];
      for (int s : cluster)
        for (int t : cluster)
          rec.noise_moment.block(expanded.offset_of(s), expanded.offset_of(t),
                                 expanded.dim_of(s), expanded.dim_of(t)) =
              expanded.weight_of(s) * expanded.weight_of(t) * agent.noise_var *
              agent.covariance;
    }

    const Eigen::VectorXd w_oe = truth.expanded_w_opt(expanded);
    const Eigen::VectorXd proj_gap =
        (Eigen::MatrixXd::Identity(Me, Me) - Pe) * w_oe + expanded.projection_offset;
    rec.drive = (variant == Variant::multitask_apc) ? Eigen::VectorXd(At * proj_gap)
                                                    : proj_gap;
    rec.anchor_gap = anchor_gap(truth, expanded);
    rec.drive_star = rec.left * rec.input_moment * rec.anchor_gap;

    rec.agents.resize(N);
    for (int k = 0; k < N; ++k) {
      rec.agents[k].blocks = expanded.clusters[k];
      rec.agents[k].weights = expanded.weights[k];
      rec.agents[k].covariance = truth.agents[k].covariance;
      rec.agents[k].noise_var = truth.agents[k].noise_var;
    }
    return rec;
  }

  // Centralized and non-cooperative models live in the per-agent space.
  const int M = topology.total_dim();
  rec.dims = topology.dims;
  rec.input_moment = truth.stacked_covariance();
  rec.noise_moment = Eigen::MatrixXd::Zero(M, M);
  for (int k = 0; k < N; ++k)
    rec.noise_moment.block(topology.offset_of(k), topology.offset_of(k), topology.dims[k],
                           topology.dims[k]) =
        truth.agents[k].noise_var * truth.agents[k].covariance;

  const Eigen::VectorXd w_o = truth.stacked_w_opt();
  const Eigen::VectorXd w_star = closed_form_w_star(truth, topology, expanded.constraints);
  rec.anchor_gap = w_o - w_star;

  if (variant == Variant::centralized_clms) {
    auto [D, b] = stack_constraints(topology, expanded.constraints);
    AffineProjector proj = build_projector(D, b);
    rec.left = proj.matrix;
    rec.drive = (Eigen::MatrixXd::Identity(M, M) - proj.matrix) * w_o + proj.offset;
  } else {  // nc_lms
    rec.left = Eigen::MatrixXd::Identity(M, M);
    rec.drive = Eigen::VectorXd::Zero(M);
  }
  rec.drive_star = rec.left * rec.input_moment * rec.anchor_gap;

  rec.agents.resize(N);
  for (int k = 0; k < N; ++k) {
    rec.agents[k].blocks = {k};
    rec.agents[k].weights = Eigen::VectorXd::Ones(1);
    rec.agents[k].covariance = truth.agents[k].covariance;
    rec.agents[k].noise_var = truth.agents[k].noise_var;
  }
  return rec;
}

Eigen::VectorXd MeanModel::bias_opt() const {
  require_stable(rho, "MeanModel::bias_opt");
  const Eigen::Index n = transition.rows();
  return (Eigen::MatrixXd::Identity(n, n) - transition).partialPivLu().solve(drive);
}

Eigen::VectorXd MeanModel::bias_star() const {
  require_stable(rho, "MeanModel::bias_star");
  const Eigen::Index n = transition.rows();
  return -mu * (Eigen::MatrixXd::Identity(n, n) - transition).partialPivLu().solve(drive_star);
}

MeanModel make_mean_model(const ErrorRecursion& rec) {
  MeanModel model;
  const Eigen::Index n = rec.left.rows();
  model.transition =
      rec.left * (Eigen::MatrixXd::Identity(n, n) - rec.mu * rec.input_moment);
  model.drive = rec.drive;
  model.drive_star = rec.drive_star;
  model.mu = rec.mu;
  model.rho = spectral_radius(model.transition);
  return model;
}

std::vector<Eigen::VectorXd> mean_curve(const MeanModel& model,
                                        const Eigen::VectorXd& initial_error,
                                        long horizon) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(horizon + 1);
  out.push_back(initial_error);
  for (long i = 0; i < horizon; ++i)
    out.push_back(model.transition * out.back() + model.drive);
  return out;
}

std::vector<Eigen::VectorXd> mean_curve_star(const MeanModel& model,
                                             const Eigen::VectorXd& initial_error,
                                             long horizon) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(horizon + 1);
  out.push_back(initial_error);
  const Eigen::VectorXd drive = -model.mu * model.drive_star;
  for (long i = 0; i < horizon; ++i)
    out.push_back(model.transition * out.back() + drive);
  return out;
}

Eigen::MatrixXd build_F_approx(const MeanModel& model, const BlockDims& dims) {
  const Eigen::MatrixXd Bt = model.transition.transpose();
  return block_kron(Bt, Bt, dims);
}

Eigen::MatrixXd build_F_exact(const ErrorRecursion& rec) {
  const int M0 = rec.dims.empty() ? 0 : rec.dims.front();
  for (int d : rec.dims)
    if (d != M0)
      throw std::invalid_argument(
          "build_F_exact needs one uniform block size; use build_F_approx or a "
          "Monte Carlo estimate for mixed dimensions");

  const Eigen::Index n = rec.left.rows();
  const Eigen::MatrixXd B =
      rec.left * (Eigen::MatrixXd::Identity(n, n) - rec.mu * rec.input_moment);
  const Eigen::MatrixXd Bt = B.transpose();
  Eigen::MatrixXd F = block_kron(Bt, Bt, rec.dims);

  const Eigen::MatrixXd Lt = rec.left.transpose();
  const Eigen::MatrixXd tail_in = block_kron(Lt, Lt, rec.dims);

  // Fourth-moment corrections are confined to within-agent block pairs: the
  // deviation of E{x x^T T x x^T} from R T R contributes c_i c_j (R (.) R) and
  // c_i c_j vec(R) vec(R)^T acting on the (i, j) block of T = left^T Sigma left.
  const int sq = M0 * M0;
  for (const auto& agent : rec.agents) {
    const Eigen::MatrixXd& R = agent.covariance;
    Eigen::MatrixXd rkron(sq, sq);
    for (int a = 0; a < M0; ++a)
      for (int b = 0; b < M0; ++b)
        rkron.block(a * M0, b * M0, M0, M0) = R(a, b) * R;
    Eigen::VectorXd rvec(sq);
    for (int b = 0; b < M0; ++b)
      for (int a = 0; a < M0; ++a) rvec(b * M0 + a) = R(a, b);
    const Eigen::MatrixXd atomic = rkron + rvec * rvec.transpose();
    for (size_t bi = 0; bi < agent.blocks.size(); ++bi)
      for (size_t bj = 0; bj < agent.blocks.size(); ++bj) {
        const double cc = agent.weights(bi) * agent.weights(bj);
        const int rg = bvec_offset(rec.dims, rec.dims, agent.blocks[bi], agent.blocks[bj]);
        F.middleRows(rg, sq) += (rec.mu * rec.mu * cc) * (atomic * tail_in.middleRows(rg, sq));
      }
  }
  return F;
}

VarianceModel make_variance_model(const ErrorRecursion& rec, const MeanModel& mean,
                                  Eigen::MatrixXd F) {
  VarianceModel model;
  model.transition = std::move(F);
  model.noise_outer = rec.left * rec.noise_moment * rec.left.transpose();
  model.mean_transition = mean.transition;
  model.drive = mean.drive;
  model.mu = rec.mu;
  model.dims = rec.dims;
  model.rho = spectral_radius(model.transition);
  return model;
}

namespace {

// bvec(Y(i)) with Y(i) = mu^2 G^T + r r^T + 2 r (E e(i))^T B^T.
Eigen::VectorXd drive_moment(const VarianceModel& var, const Eigen::VectorXd& mean_error) {
  Eigen::MatrixXd Y = var.mu * var.mu * var.noise_outer.transpose();
  Y += var.drive * var.drive.transpose();
  Y += 2.0 * var.drive * (var.mean_transition * mean_error).transpose().eval();
  return bvec(Y, var.dims);
}

}  // namespace

TransientResult transient_msd(const MeanModel& mean, const VarianceModel& var,
                              const Eigen::VectorXd& initial_error, long horizon,
                              const Eigen::MatrixXd& metric) {
  TransientResult result;
  result.stable = var.rho < 1.0;
  auto& values = result.curve.values;
  values.reserve(horizon + 1);
  values.push_back(initial_error.dot(metric * initial_error));

  const Eigen::VectorXd sigma = bvec(metric, var.dims);
  const Eigen::VectorXd c0 = bvec(Eigen::MatrixXd(initial_error * initial_error.transpose()),
                                  var.dims);
  Eigen::VectorXd weight = sigma;                       // F^i sigma
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(sigma.size());
  Eigen::VectorXd mean_error = initial_error;
  const Eigen::MatrixXd& F = var.transition;

  for (long i = 0; i < horizon; ++i) {
    const Eigen::VectorXd y = drive_moment(var, mean_error);
    const Eigen::VectorXd next_weight = F * weight;
    values.push_back(values.back() + c0.dot(next_weight - weight) + y.dot(sigma) +
                     gamma.dot(sigma));
    weight = next_weight;
    gamma = F.transpose() * (gamma + y) - y;
    mean_error = mean.transition * mean_error + mean.drive;
  }
  result.curve.provenance = "theory";
  return result;
}

std::vector<double> transient_msd_direct(const MeanModel& mean, const VarianceModel& var,
                                         const Eigen::VectorXd& initial_error,
                                         long horizon, const Eigen::MatrixXd& metric) {
  const Eigen::VectorXd sigma = bvec(metric, var.dims);
  const Eigen::VectorXd c0 = bvec(Eigen::MatrixXd(initial_error * initial_error.transpose()),
                                  var.dims);
  std::vector<Eigen::VectorXd> weights{sigma};  // F^j sigma
  for (long j = 0; j < horizon; ++j) weights.push_back(var.transition * weights.back());
  std::vector<Eigen::VectorXd> y;
  Eigen::VectorXd mean_error = initial_error;
  for (long i = 0; i < horizon; ++i) {
    y.push_back(drive_moment(var, mean_error));
    mean_error = mean.transition * mean_error + mean.drive;
  }
  std::vector<double> values;
  values.reserve(horizon + 1);
  for (long i = 0; i <= horizon; ++i) {
    double v = c0.dot(weights[i]);
    for (long j = 0; j < i; ++j) v += y[j].dot(weights[i - 1 - j]);
    values.push_back(v);
  }
  return values;
}

double steady_state_msd(const MeanModel& mean, const VarianceModel& var,
                        const Eigen::MatrixXd& metric_ss) {
  require_stable(var.rho, "steady_state_msd");
  require_stable(mean.rho, "steady_state_msd");
  const Eigen::VectorXd y_inf = drive_moment(var, mean.bias_opt());
  const Eigen::VectorXd sigma_ss = bvec(metric_ss, var.dims);
  const Eigen::Index n = var.transition.rows();
  const Eigen::VectorXd solved =
      (Eigen::MatrixXd::Identity(n, n) - var.transition).partialPivLu().solve(sigma_ss);
  return y_inf.dot(solved);
}

TransientResult star_relative_curve(const MeanModel& mean, const VarianceModel& var,
                                    const Eigen::VectorXd& initial_error_opt,
                                    const Eigen::VectorXd& gap, long horizon,
                                    const Eigen::MatrixXd& metric) {
  TransientResult result = transient_msd(mean, var, initial_error_opt, horizon, metric);
  const auto means = mean_curve(mean, initial_error_opt, horizon);
  const double gap_term = gap.dot(metric * gap);
  for (long i = 0; i <= horizon; ++i)
    result.curve.values[i] += -2.0 * means[i].dot(metric * gap) + gap_term;
  result.curve.reference = "w_star";
  return result;
}

std::pair<MeanModel, VarianceModel> competing_models(Variant variant,
                                                     const GroundTruth& truth,
                                                     const ExpandedNetwork& expanded,
                                                     double mu, bool exact_f) {
  ErrorRecursion rec = build_recursion(variant, truth, expanded, mu);
  if (rec.total_dim() > kMaxVarianceDim)
    throw std::invalid_argument("variance engine caps the state dimension at " +
                                std::to_string(kMaxVarianceDim) + ", got " +
                                std::to_string(rec.total_dim()));
  MeanModel mean = make_mean_model(rec);
  bool uniform = true;
  for (int d : rec.dims) uniform = uniform && d == rec.dims.front();
  Eigen::MatrixXd F = (exact_f && uniform) ? build_F_exact(rec)
                                           : build_F_approx(mean, rec.dims);
  VarianceModel var = make_variance_model(rec, mean, std::move(F));
  return {std::move(mean), std::move(var)};
}

OrderingComparison compare_orderings(const GroundTruth& truth,
                                     const ExpandedNetwork& expanded, double mu,
                                     const Eigen::MatrixXd& metric_ss, int max_terms,
                                     double rel_tol) {
  for (int k = 0; k < expanded.topology.num_agents(); ++k) {
    const int j = expanded.cluster_size(k);
    if ((expanded.weights[k].array() - 1.0 / j).abs().maxCoeff() > 1e-12 ||
        (expanded.combiners[k].array() - 1.0 / j).abs().maxCoeff() > 1e-12)
      throw std::invalid_argument(
          "compare_orderings assumes uniform weights and uniform fully connected "
          "combiners");
  }

  ErrorRecursion rec = build_recursion(Variant::multitask_apc, truth, expanded, mu);
  const int Me = rec.total_dim();
  const Eigen::MatrixXd& P = expanded.projector;
  const Eigen::MatrixXd A = expanded.combiner;  // symmetric here
  const Eigen::MatrixXd base =
      P * A.transpose() * (Eigen::MatrixXd::Identity(Me, Me) - mu * rec.input_moment);
  const double rho = spectral_radius(base);
  require_stable(rho, "compare_orderings");
  const Eigen::MatrixXd psp = P * rec.noise_moment * P;

  OrderingComparison cmp;
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(Me, Me);
  const double mu2 = mu * mu;
  double prev_cp = 0.0;
  for (int j = 0; j < max_terms; ++j) {
    const Eigen::MatrixXd Q = W * psp * W.transpose();
    const double t_pc = mu2 * (metric_ss * A.transpose() * Q * A).trace();
    const double t_cp = mu2 * (metric_ss * Q).trace();
    cmp.zeta_pc += t_pc;
    cmp.zeta_cp += t_cp;
    cmp.terms = j + 1;
    const double scale = std::max(std::abs(cmp.zeta_cp), std::abs(cmp.zeta_pc));
    if (j > 4 && std::max(t_pc, t_cp) < rel_tol * scale) {
      const double q = prev_cp > 0.0 ? std::min(t_cp / prev_cp, rho * rho) : rho * rho;
      cmp.tail_bound = std::max(t_pc, t_cp) * q / std::max(1.0 - q, 1e-6);
      break;
    }
    prev_cp = t_cp;
    W = base * W;
  }
  cmp.difference = cmp.zeta_pc - cmp.zeta_cp;
  return cmp;
}

Eigen::MatrixXd network_msd_metric(const ExpandedNetwork& expanded) {
  const int Me = expanded.total_dim();
  Eigen::MatrixXd metric = Eigen::MatrixXd::Zero(Me, Me);
  const double inv_n = 1.0 / expanded.topology.num_agents();
  for (int s = 0; s < expanded.num_subnodes(); ++s) {
    const int d = expanded.dim_of(s);
    metric.block(expanded.offset_of(s), expanded.offset_of(s), d, d) =
        (inv_n / expanded.cluster_size(expanded.subnodes[s].agent)) *
        Eigen::MatrixXd::Identity(d, d);
  }
  return metric;
}

Eigen::MatrixXd agent_msd_metric(const NetworkTopology& topology) {
  const int M = topology.total_dim();
  return Eigen::MatrixXd::Identity(M, M) / topology.num_agents();
}

AffineModel build_fixed_regressor_model(const FixedDesign& design,
                                        const ExpandedNetwork& expanded, double mu,
                                        double eta) {
  const int Me = expanded.total_dim();
  const int N = expanded.topology.num_agents();
  Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(Me, Me);
  Eigen::VectorXd pull = Eigen::VectorXd::Zero(Me);
  Eigen::MatrixXd noise_map = Eigen::MatrixXd::Zero(Me, N);
  for (int s = 0; s < expanded.num_subnodes(); ++s) {
    const int k = expanded.subnodes[s].agent;
    const int off = expanded.offset_of(s);
    const int d = expanded.dim_of(s);
    const double c = expanded.weight_of(s);
    const Eigen::VectorXd& x = design.regressor[k];
    hessian.block(off, off, d, d) =
        c * (x * x.transpose() + 0.5 * eta * Eigen::MatrixXd::Identity(d, d));
    pull.segment(off, d) = c * design.mean_obs(k) * x;
    noise_map.block(off, k, d, 1) = mu * c * x;
  }
  const Eigen::MatrixXd front = expanded.combiner.transpose() * expanded.projector;
  AffineModel model;
  model.transition = front * (Eigen::MatrixXd::Identity(Me, Me) - mu * hessian);
  model.drive = front * (mu * pull) - expanded.combiner.transpose() * expanded.projection_offset;
  model.noise_map = front * noise_map;
  model.noise_var = design.noise_var;
  model.rho = spectral_radius(model.transition);
  return model;
}

Eigen::VectorXd mean_fixed_point(const AffineModel& model) {
  require_stable(model.rho, "mean_fixed_point");
  const Eigen::Index n = model.transition.rows();
  return (Eigen::MatrixXd::Identity(n, n) - model.transition)
      .partialPivLu()
      .solve(model.drive);
}

Eigen::MatrixXd steady_covariance(const AffineModel& model, double tol) {
  require_stable(model.rho, "steady_covariance");
  Eigen::MatrixXd C =
      model.noise_map * model.noise_var.asDiagonal() * model.noise_map.transpose();
  Eigen::MatrixXd X = model.transition;
  for (int it = 0; it < 128; ++it) {
    const Eigen::MatrixXd inc = X * C * X.transpose();
    C += inc;
    const double rel = inc.norm() / std::max(C.norm(), 1e-300);
    if (rel < tol) break;
    X = X * X;
  }
  return C;
}

double steady_msd(const AffineModel& model, const Eigen::VectorXd& anchor,
                  const Eigen::MatrixXd& metric) {
  const Eigen::VectorXd bias = mean_fixed_point(model) - anchor;
  const Eigen::MatrixXd C = steady_covariance(model);
  return (metric * C).trace() + bias.dot(metric * bias);
}

}  // namespace dlms::theory
