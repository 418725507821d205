#pragma once

#include <string>
#include <vector>

#include "mmnl/types.hpp"

namespace mmnl {

struct RowFitOptions {
  double grad_tol = 1e-8;
  double ridge = 1e-8;  // added to the Hessian diagonal of every Newton solve
  int max_iters = 100;

  void validate() const;
};

struct RowFitReport {
  int row = 0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool separated = false;  // no finite maximizer exists; converged is then false
};

struct RowFit {
  Vector theta;  // centered
  RowFitReport report;
};

/// Unregularized MNL fit for one type by damped Newton from theta = 0.
/// All observations must share one type index. The returned vector has its
/// mean subtracted.
RowFit fit_row_newton(const ChoiceDataset& row_observations, const RowFitOptions& opts);

/// Per-row average negative log-likelihood minimized by fit_row_newton.
double row_objective(const Vector& theta, const ChoiceDataset& row_observations);

struct MleResult {
  ParamMatrix estimate;
  std::vector<RowFitReport> reports;  // one per row, including empty rows

  bool all_converged() const;
  /// One line per row: "row iterations grad_norm converged".
  std::string summary() const;
};

/// Independent per-type fits; rows without observations are zero.
MleResult fit_mle(const ChoiceDataset& data, const RowFitOptions& opts = {});

}  // namespace mmnl
