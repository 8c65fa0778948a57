#include "dlms/block_kron.hpp"

#include <numeric>
#include <stdexcept>

namespace dlms {

int block_total(const BlockDims& dims) {
  return std::accumulate(dims.begin(), dims.end(), 0);
}

int block_offset(const BlockDims& dims, int block) {
  return std::accumulate(dims.begin(), dims.begin() + block, 0);
}

int bvec_offset(const BlockDims& row_dims, const BlockDims& col_dims,
                int row_block, int col_block) {
  const int rtot = block_total(row_dims);
  int off = 0;
  for (int j = 0; j < col_block; ++j) off += rtot * col_dims[j];
  for (int i = 0; i < row_block; ++i) off += row_dims[i] * col_dims[col_block];
  return off;
}

Eigen::VectorXd bvec(const Eigen::MatrixXd& A, const BlockDims& row_dims,
                     const BlockDims& col_dims) {
  if (A.rows() != block_total(row_dims) || A.cols() != block_total(col_dims))
    throw std::invalid_argument("bvec: block dims do not match matrix size");
  Eigen::VectorXd v(A.size());
  int pos = 0;
  int coff = 0;
  for (int cj : col_dims) {
    int roff = 0;
    for (int ri : row_dims) {
      for (int c = 0; c < cj; ++c)
        for (int r = 0; r < ri; ++r) v(pos++) = A(roff + r, coff + c);
      roff += ri;
    }
    coff += cj;
  }
  return v;
}

Eigen::VectorXd bvec(const Eigen::MatrixXd& A, const BlockDims& dims) {
  return bvec(A, dims, dims);
}

Eigen::MatrixXd unbvec(const Eigen::VectorXd& v, const BlockDims& row_dims,
                       const BlockDims& col_dims) {
  const int rtot = block_total(row_dims);
  const int ctot = block_total(col_dims);
  if (v.size() != static_cast<Eigen::Index>(rtot) * ctot)
    throw std::invalid_argument("unbvec: length does not match block dims");
  Eigen::MatrixXd A(rtot, ctot);
  int pos = 0;
  int coff = 0;
  for (int cj : col_dims) {
    int roff = 0;
    for (int ri : row_dims) {
      for (int c = 0; c < cj; ++c)
        for (int r = 0; r < ri; ++r) A(roff + r, coff + c) = v(pos++);
      roff += ri;
    }
    coff += cj;
  }
  return A;
}

Eigen::MatrixXd unbvec(const Eigen::VectorXd& v, const BlockDims& dims) {
  return unbvec(v, dims, dims);
}

Eigen::MatrixXd block_kron(const Eigen::MatrixXd& X, const BlockDims& x_row_dims,
                           const BlockDims& x_col_dims, const Eigen::MatrixXd& Y,
                           const BlockDims& y_row_dims, const BlockDims& y_col_dims) {
  if (X.rows() != block_total(x_row_dims) || X.cols() != block_total(x_col_dims) ||
      Y.rows() != block_total(y_row_dims) || Y.cols() != block_total(y_col_dims))
    throw std::invalid_argument("block_kron: block dims do not match matrix sizes");

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(X.rows()) * Y.rows(),
      static_cast<Eigen::Index>(X.cols()) * Y.cols());

  // Row group (J, I) holds X_{J,L} (x) Y_{I,K} at column group (L, K).
  int xro = 0;
  for (size_t J = 0; J < x_row_dims.size(); ++J) {
    int yro = 0;
    for (size_t I = 0; I < y_row_dims.size(); ++I) {
      const int rg = xro * Y.rows() + x_row_dims[J] * yro;
      int xco = 0;
      for (size_t L = 0; L < x_col_dims.size(); ++L) {
        int yco = 0;
        for (size_t K = 0; K < y_col_dims.size(); ++K) {
          const int cg = xco * Y.cols() + x_col_dims[L] * yco;
          for (int a = 0; a < x_row_dims[J]; ++a)
            for (int b = 0; b < x_col_dims[L]; ++b) {
              const double x = X(xro + a, xco + b);
              if (x != 0.0)
                out.block(rg + a * y_row_dims[I], cg + b * y_col_dims[K],
                          y_row_dims[I], y_col_dims[K]) =
                    x * Y.block(yro, yco, y_row_dims[I], y_col_dims[K]);
            }
          yco += y_col_dims[K];
        }
        xco += x_col_dims[L];
      }
      yro += y_row_dims[I];
    }
    xro += x_row_dims[J];
  }
  return out;
}

Eigen::MatrixXd block_kron(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                           const BlockDims& dims) {
  return block_kron(X, dims, dims, Y, dims, dims);
}

}  // namespace dlms
