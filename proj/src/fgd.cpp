#include "mmnl/fgd.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "mmnl/likelihood.hpp"
#include "mmnl/linalg.hpp"
#include "mmnl/text_io.hpp"

namespace mmnl {

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be finite and nonnegative");
  }
  if (rank_tilde < 1) throw DomainError("rank_tilde must be at least 1");
  if (!(beta_dec > 0.0 && beta_dec < 1.0)) throw DomainError("beta_dec must lie in (0, 1)");
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  if (max_outer_iters < 1 || max_linesearch_iters < 1) {
    throw DomainError("iteration caps must be at least 1");
  }
}

InitResult init_factors(const ChoiceDataset& data, double lambda, int rank_tilde) {
  const int m = data.num_types();
  const int n = data.num_items();
  if (rank_tilde < 1 || rank_tilde > std::min(m, n)) {
    throw DomainError("rank_tilde " + std::to_string(rank_tilde) + " outside [1, min(m, n)=" +
                      std::to_string(std::min(m, n)) + "]");
  }
  if (data.empty()) throw DomainError("cannot initialize from an empty dataset");

  InitResult out;
  const Matrix grad_zero = nll_gradient(Matrix::Zero(m, n), data);
  Matrix corner = Matrix::Zero(m, n);
  corner(0, 0) = 1.0;
  const Matrix grad_corner = nll_gradient(corner, data);
  out.gamma = (grad_zero - (grad_corner + lambda * corner)).norm();
  if (!(out.gamma >= 1e-15)) {
    out.warnings.push_back("degenerate smoothness estimate gamma=" + format_double(out.gamma) +
                           "; using gamma=1");
    out.gamma = 1.0;
  }

  const SvdResult svd = svd_top_k(-grad_zero, rank_tilde);
  const Vector scale = svd.singular_values.cwiseSqrt() / std::sqrt(out.gamma);
  out.factors.u = svd.left_vectors * scale.asDiagonal();
  out.factors.v = svd.right_vectors * scale.asDiagonal();
  return out;
}

FitResult fit(const ChoiceDataset& data, const SolverConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  InitResult init = init_factors(data, config.lambda, config.rank_tilde);
  FitResult result;
  result.warnings = std::move(init.warnings);
  FactorPair current = std::move(init.factors);
  ++result.total_gradient_evals;  // the spectral start reads grad L(0)

  FactoredEvaluator evaluator(data);
  double f = evaluator.objective(current, config.lambda);
  if (!std::isfinite(f)) {
    throw NumericalError("non-finite objective at initialization (lambda=" +
                         format_double(config.lambda) + ", gamma=" + format_double(init.gamma) +
                         ", |U|_F=" + format_double(current.u.norm()) +
                         ", |V|_F=" + format_double(current.v.norm()) + ")");
  }
  result.objective_trace.push_back(f);

  FactorPair trial;
  for (int iter = 0; iter < config.max_outer_iters; ++iter) {
    // The accepted trial was the last point evaluated, so its choice
    // probabilities are reused here.
    const FactorGradients grad = evaluator.gradients(current, config.lambda);
    ++result.total_gradient_evals;

    double eta = 1.0;
    double f_trial = f;
    bool accepted = false;
    for (int ls = 0; ls < config.max_linesearch_iters; ++ls) {
      trial.u = current.u - eta * grad.u;
      trial.v = current.v - eta * grad.v;
      f_trial = evaluator.objective(trial, config.lambda);
      if (f_trial <= f) {
        accepted = true;
        break;
      }
      eta *= config.beta_dec;
    }
    if (!accepted) {
      result.warnings.push_back("line search found no descent after " +
                                std::to_string(config.max_linesearch_iters) + " trials");
      break;
    }

    std::swap(current, trial);
    result.objective_trace.push_back(f_trial);
    result.outer_iters = iter + 1;
    // Relative decrease (f - f') / f' <= tau, written without the division
    // so a zero objective also terminates.
    const bool done = f - f_trial <= config.tau * f_trial;
    f = f_trial;
    if (done) {
      result.converged = true;
      break;
    }
  }

  result.estimate = row_center(current.u * current.v.transpose());
  result.factors = std::move(current);
  result.objective_evals = evaluator.objective_evals();
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace mmnl
