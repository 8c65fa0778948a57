#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dlms {

/// Per-block sizes of a block-partitioned matrix dimension.
using BlockDims = std::vector<int>;

int block_total(const BlockDims& dims);
int block_offset(const BlockDims& dims, int block);

/// Position of vec(block(row_block, col_block)) inside bvec: blocks are
/// stacked block-column-major, each block vectorized column-major.
int bvec_offset(const BlockDims& row_dims, const BlockDims& col_dims,
                int row_block, int col_block);

/// Block vectorization: bvec(A) = col{ vec(A_{1,1}), ..., vec(A_{R,1}),
/// vec(A_{1,2}), ... }. With 1x1 blocks this is the plain vec.
Eigen::VectorXd bvec(const Eigen::MatrixXd& A, const BlockDims& row_dims,
                     const BlockDims& col_dims);
Eigen::VectorXd bvec(const Eigen::MatrixXd& A, const BlockDims& dims);

Eigen::MatrixXd unbvec(const Eigen::VectorXd& v, const BlockDims& row_dims,
                       const BlockDims& col_dims);
Eigen::MatrixXd unbvec(const Eigen::VectorXd& v, const BlockDims& dims);

/// Block Kronecker (Tracy-Singh) product for conformally partitioned
/// matrices. Chosen so that bvec(U S W) = (W^T block_kron U) bvec(S) and
/// (A bk B)(C bk D) = (AC) bk (BD) hold; with 1x1 blocks it reduces to the
/// plain Kronecker product.
Eigen::MatrixXd block_kron(const Eigen::MatrixXd& X, const BlockDims& x_row_dims,
                           const BlockDims& x_col_dims, const Eigen::MatrixXd& Y,
                           const BlockDims& y_row_dims, const BlockDims& y_col_dims);
Eigen::MatrixXd block_kron(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                           const BlockDims& dims);

}  // namespace dlms
