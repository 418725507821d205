#pragma once

#include <string>
#include <vector>

#include "mmnl/types.hpp"

namespace mmnl {

struct SolverConfig {
  double lambda = 0.0;
  int rank_tilde = 1;
  double beta_dec = 0.8;       // line-search shrink factor
  double tau = 1e-10;          // relative-decrease stopping tolerance
  int max_outer_iters = 10000;
  int max_linesearch_iters = 100;

  void validate() const;
};

struct FitResult {
  ParamMatrix estimate;                 // row_center(U V^T)
  FactorPair factors;
  std::vector<double> objective_trace;  // initial objective, then every accepted step
  int outer_iters = 0;
  long long total_gradient_evals = 0;
  long long objective_evals = 0;
  double wall_time_seconds = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct InitResult {
  FactorPair factors;
  double gamma = 1.0;
  std::vector<std::string> warnings;
};

/// Spectral start from the top rank_tilde singular triplets of -grad L(0),
/// scaled by gamma^{-1/2} where gamma is a finite-difference smoothness
/// estimate |grad L(0) - grad L(E11) - lambda E11|_F.
InitResult init_factors(const ChoiceDataset& data, double lambda, int rank_tilde);

/// Nuclear-norm regularized MNL estimate via gradient descent on the factors
/// with backtracking line search.
FitResult fit(const ChoiceDataset& data, const SolverConfig& config);

}  // namespace mmnl
