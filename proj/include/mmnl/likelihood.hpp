#pragma once

#include <span>

#include "mmnl/types.hpp"

namespace mmnl {

/// MNL probability that `item` is picked from `assortment` under the
/// parameter row `theta_row` (weights e^{-theta}).
double choice_prob(std::span<const double> theta_row, std::span<const int> assortment, int item);

/// Average negative log-likelihood
///   L(theta) = (1/T) sum_t log sum_{j in S_t} exp(theta[i_t, j_t] - theta[i_t, j]).
/// Always >= 0.
double neg_log_likelihood(const Matrix& theta, const ChoiceDataset& data);

/// Gradient of neg_log_likelihood; every row sums to zero.
Matrix nll_gradient(const Matrix& theta, const ChoiceDataset& data);

/// L(U V^T) + (lambda/2)(|U|_F^2 + |V|_F^2), evaluated without forming U V^T.
double factored_objective(const FactorPair& factors, const ChoiceDataset& data, double lambda);

struct FactorGradients {
  Matrix u;  // grad L(UV^T) V + lambda U
  Matrix v;  // grad L(UV^T)^T U + lambda V
};

/// Gradients of factored_objective with respect to U and V, accumulated one
/// observation at a time in dataset order.
FactorGradients factored_gradients(const FactorPair& factors, const ChoiceDataset& data,
                                   double lambda);

/// Reusable evaluator for the factored objective and its gradients over one
/// dataset. Keeps flat score buffers between calls, and remembers the choice
/// probabilities of the last objective evaluation so that a gradient taken
/// at the same factors skips recomputing them. Results are bitwise identical
/// to the free functions above.
class FactoredEvaluator {
 public:
  explicit FactoredEvaluator(const ChoiceDataset& data);

  double objective(const FactorPair& factors, double lambda);
  FactorGradients gradients(const FactorPair& factors, double lambda);

  long long objective_evals() const { return objective_evals_; }
  long long probability_passes() const { return probability_passes_; }

 private:
  // Fills probs_ (and returns the average log term) for the given factors.
  double compute_probabilities(const FactorPair& factors);

  const ChoiceDataset& data_;
  std::vector<int> chosen_pos_;  // position of j_t inside its assortment
  std::vector<double> probs_;    // one entry per flattened assortment item
  FactorPair cached_at_;
  double cached_fit_ = 0.0;
  bool cache_valid_ = false;
  long long objective_evals_ = 0;
  long long probability_passes_ = 0;
};

}  // namespace mmnl
