#include "oracles.hpp"

#include <stdexcept>

#include "dlms/sampling.hpp"

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DenseProjector dense_projector(const MatrixXd& D, const VectorXd& b) {
  Eigen::JacobiSVD<MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd sv = svd.singularValues();
  MatrixXd inv_sv = MatrixXd::Zero(sv.size(), sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < 1e-12 * sv(0)) throw std::runtime_error("dense_projector: rank deficient");
    inv_sv(i, i) = 1.0 / sv(i);
  }
  const MatrixXd pinv = svd.matrixV() * inv_sv * svd.matrixU().transpose();
  DenseProjector out;
  out.matrix = MatrixXd::Identity(D.cols(), D.cols()) - pinv * D;
  out.offset = pinv * b;
  return out;
}

Eigen::VectorXd nullspace_qp(const MatrixXd& H, const VectorXd& g, const MatrixXd& D,
                             const VectorXd& b) {
  Eigen::JacobiSVD<MatrixXd> svd(D, Eigen::ComputeFullV | Eigen::ComputeThinU);
  const VectorXd sv = svd.singularValues();
  const Eigen::Index rank = sv.size();
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) < 1e-12 * sv(0)) throw std::runtime_error("nullspace_qp: rank deficient");
  // particular solution of D w = -b, then minimize over the nullspace
  VectorXd w_p = svd.matrixV().leftCols(rank) *
                 (sv.array().inverse().matrix().asDiagonal() *
                  (svd.matrixU().transpose() * (-b)));
  const MatrixXd basis = svd.matrixV().rightCols(D.cols() - rank);
  const MatrixXd reduced = basis.transpose() * H * basis;
  const VectorXd rhs = basis.transpose() * (g - H * w_p);
  return w_p + basis * reduced.ldlt().solve(rhs);
}

namespace {

struct BlockLayout {
  std::vector<int> agent_of_column;  // column -> agent index
  std::vector<int> comp_of_column;   // column -> component within the regressor
  std::vector<double> weight_of_column;
  std::vector<int> block_offset;     // block -> first column
};

BlockLayout layout(const dlms::theory::ErrorRecursion& rec) {
  BlockLayout lay;
  lay.block_offset.resize(rec.dims.size());
  int off = 0;
  for (size_t s = 0; s < rec.dims.size(); ++s) {
    lay.block_offset[s] = off;
    off += rec.dims[s];
  }
  lay.agent_of_column.resize(off);
  lay.comp_of_column.resize(off);
  lay.weight_of_column.resize(off);
  for (size_t k = 0; k < rec.agents.size(); ++k)
    for (size_t m = 0; m < rec.agents[k].blocks.size(); ++m) {
      const int s = rec.agents[k].blocks[m];
      for (int u = 0; u < rec.dims[s]; ++u) {
        lay.agent_of_column[lay.block_offset[s] + u] = static_cast<int>(k);
        lay.comp_of_column[lay.block_offset[s] + u] = u;
        lay.weight_of_column[lay.block_offset[s] + u] = rec.agents[k].weights(m);
      }
    }
  return lay;
}

}  // namespace

Eigen::MatrixXd elementwise_fourth_moment(const dlms::theory::ErrorRecursion& rec) {
  const int n = rec.total_dim();
  const MatrixXd& L = rec.left;
  const double mu = rec.mu;
  const BlockLayout lay = layout(rec);

  // B(i)_{pq} = L_{pq} - mu * sum_u w_q L[p, col(u of q's block)] x_k[u] x_k[v(q)]
  const auto cov = [&](int k) -> const MatrixXd& { return rec.agents[k].covariance; };

  // second moments E[B_pq]
  MatrixXd first(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const int k = lay.agent_of_column[q];
      const int v = lay.comp_of_column[q];
      const int base = q - v;
      double acc = L(p, q);
      for (int u = 0; u < cov(k).rows(); ++u)
        acc -= mu * lay.weight_of_column[q] * L(p, base + u) * cov(k)(u, v);
      first(p, q) = acc;
    }

  // full pair expectations E[B_pq B_rs]
  std::vector<double> pair(static_cast<size_t>(n) * n * n * n);
  const auto at = [&](int p, int q, int r, int s) -> double& {
    return pair[((static_cast<size_t>(p) * n + q) * n + r) * n + s];
  };
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const int k1 = lay.agent_of_column[q], v1 = lay.comp_of_column[q];
          const int k2 = lay.agent_of_column[s], v2 = lay.comp_of_column[s];
          const int base1 = q - v1, base2 = s - v2;
          const double w1 = lay.weight_of_column[q], w2 = lay.weight_of_column[s];
          double quad1 = 0, quad2 = 0, cross = 0;
          for (int u = 0; u < cov(k1).rows(); ++u)
            quad1 += w1 * L(p, base1 + u) * cov(k1)(u, v1);
          for (int w = 0; w < cov(k2).rows(); ++w)
            quad2 += w2 * L(r, base2 + w) * cov(k2)(w, v2);
          if (k1 == k2) {
            const MatrixXd& R = cov(k1);
            for (int u = 0; u < R.rows(); ++u)
              for (int w = 0; w < R.rows(); ++w)
                cross += w1 * w2 * L(p, base1 + u) * L(r, base2 + w) *
                         (R(u, v1) * R(w, v2) + R(u, w) * R(v1, v2) + R(u, v2) * R(v1, w));
          } else {
            cross = quad1 * quad2;
          }
          at(p, q, r, s) = L(p, q) * L(r, s) - mu * L(p, q) * quad2 -
                           mu * L(r, s) * quad1 + mu * mu * cross;
        }

  // F column j = bvec(E{B^T unbvec(e_j) B})
  MatrixXd F(n * n, n * n);
  for (int j = 0; j < n * n; ++j) {
    VectorXd ej = VectorXd::Zero(n * n);
    ej(j) = 1.0;
    const MatrixXd S = dlms::unbvec(ej, rec.dims);
    MatrixXd expectation(n, n);
    for (int alpha = 0; alpha < n; ++alpha)
      for (int beta = 0; beta < n; ++beta) {
        double acc = 0;
        for (int p = 0; p < n; ++p)
          for (int r = 0; r < n; ++r)
            if (S(p, r) != 0.0) acc += S(p, r) * at(p, alpha, r, beta);
        expectation(alpha, beta) = acc;
      }
    F.col(j) = dlms::bvec(expectation, rec.dims);
  }
  (void)first;
  return F;
}

McMatrix monte_carlo_fourth_moment(const dlms::theory::ErrorRecursion& rec, int samples,
                                   std::uint64_t seed) {
  const int n = rec.total_dim();
  const BlockLayout lay = layout(rec);
  std::vector<Eigen::LLT<MatrixXd>> chol;
  for (const auto& agent : rec.agents) chol.emplace_back(agent.covariance);

  MatrixXd sum = MatrixXd::Zero(n * n, n * n);
  MatrixXd sumsq = MatrixXd::Zero(n * n, n * n);
  MatrixXd R_i = MatrixXd::Zero(n, n);
  for (int it = 0; it < samples; ++it) {
    dlms::CounterRng rng(seed ^ (0x4eadbeefULL + static_cast<std::uint64_t>(it)));
    for (size_t k = 0; k < rec.agents.size(); ++k) {
      const int d = static_cast<int>(rec.agents[k].covariance.rows());
      VectorXd g(d);
      for (int i = 0; i < d; ++i) g(i) = rng.next_normal();
      const VectorXd x = MatrixXd(chol[k].matrixL()) * g;
      const MatrixXd outer = x * x.transpose();
      for (int m : rec.agents[k].blocks) {
        double w = 0;
        for (size_t mm = 0; mm < rec.agents[k].blocks.size(); ++mm)
          if (rec.agents[k].blocks[mm] == m) w = rec.agents[k].weights(mm);
        R_i.block(lay.block_offset[m], lay.block_offset[m], d, d) = w * outer;
      }
    }
    const MatrixXd Bt =
        (rec.left * (MatrixXd::Identity(n, n) - rec.mu * R_i)).transpose();
    const MatrixXd sample = dlms::block_kron(Bt, Bt, rec.dims);
    sum += sample;
    sumsq += sample.cwiseProduct(sample);
  }
  McMatrix out;
  out.mean = sum / samples;
  out.std_error =
      ((sumsq / samples - out.mean.cwiseProduct(out.mean)).cwiseMax(0.0) / samples)
          .cwiseSqrt();
  return out;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
