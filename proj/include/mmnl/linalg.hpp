#pragma once

#include "mmnl/types.hpp"

namespace mmnl {

/// Subtracts each row's mean from that row.
ParamMatrix row_center(const Matrix& matrix);

/// True when every row sums to zero within 1e-9 * n * max(1, |row|_inf).
bool rows_centered(const Matrix& matrix);

/// (1 / sqrt(mn)) * |a - b|_F
double rmse(const Matrix& a, const Matrix& b);

/// Top-k singular triplets, sorted by decreasing singular value. Signs are
/// canonical: the largest-magnitude entry of each left vector is positive.
SvdResult svd_top_k(const Matrix& matrix, int k);

double nuclear_norm(const Matrix& matrix);

}  // namespace mmnl
