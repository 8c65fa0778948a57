#include "dlms/projection.hpp"

#include <string>

namespace dlms {

namespace {
constexpr double kPivotTolerance = 1e-10;

Eigen::LDLT<Eigen::MatrixXd> factor_gram(const Eigen::MatrixXd& D) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(D * D.transpose());
  const Eigen::VectorXd pivots = ldlt.vectorD();
  const double largest = pivots.size() ? pivots.maxCoeff() : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < pivots.size(); ++i)
    if (pivots(i) > kPivotTolerance * largest) ++rank;
  if (rank != pivots.size() || largest <= 0.0)
    throw RankError("constraint matrix is not full row rank (numerical rank " +
                        std::to_string(rank) + " of " + std::to_string(pivots.size()) + ")",
                    rank, static_cast<int>(pivots.size()));
  return ldlt;
}
}  // namespace

Eigen::MatrixXd solve_gram(const Eigen::MatrixXd& D, const Eigen::MatrixXd& rhs) {
  return factor_gram(D).solve(rhs);
}

AffineProjector build_projector(const Eigen::MatrixXd& D, const Eigen::VectorXd& b) {
  if (D.rows() != b.size())
    throw std::invalid_argument("build_projector: offset length differs from row count");
  auto ldlt = factor_gram(D);
  AffineProjector proj;
  proj.matrix = Eigen::MatrixXd::Identity(D.cols(), D.cols()) -
                D.transpose() * ldlt.solve(D);
  proj.offset = D.transpose() * ldlt.solve(b);
  return proj;
}

}  // namespace dlms
