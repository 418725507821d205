#include "mmnl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmnl {

ParamMatrix row_center(const Matrix& matrix) {
  ParamMatrix out = matrix;
  if (matrix.cols() == 0) return out;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double mean = out.row(i).mean();
    out.row(i).array() -= mean;
  }
  return out;
}

bool rows_centered(const Matrix& matrix) {
  const double n = static_cast<double>(matrix.cols());
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const double scale = std::max(1.0, matrix.row(i).cwiseAbs().maxCoeff());
    if (std::abs(matrix.row(i).sum()) > 1e-9 * n * scale) return false;
  }
  return true;
}

double rmse(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DomainError("rmse: shape mismatch " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
  }
  if (a.size() == 0) return 0.0;
  return (a - b).norm() / std::sqrt(static_cast<double>(a.rows()) * static_cast<double>(a.cols()));
}

SvdResult svd_top_k(const Matrix& matrix, int k) {
  const Eigen::Index min_dim = std::min(matrix.rows(), matrix.cols());
  if (k < 1 || k > min_dim) {
    throw DomainError("svd_top_k: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(min_dim) + "]");
  }
  const Eigen::MatrixXd dense = matrix;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdResult out;
  out.left_vectors = svd.matrixU().leftCols(k);
  out.right_vectors = svd.matrixV().leftCols(k);
  out.singular_values = svd.singularValues().head(k);

  for (int c = 0; c < k; ++c) {
    Eigen::Index pivot = 0;
    out.left_vectors.col(c).cwiseAbs().maxCoeff(&pivot);
    if (out.left_vectors(pivot, c) < 0.0) {
      out.left_vectors.col(c) *= -1.0;
      out.right_vectors.col(c) *= -1.0;
    }
  }
  return out;
}

double nuclear_norm(const Matrix& matrix) {
  const Eigen::Index min_dim = std::min(matrix.rows(), matrix.cols());
  if (min_dim == 0) return 0.0;
  return svd_top_k(matrix, static_cast<int>(min_dim)).singular_values.sum();
}

}  // namespace mmnl
