#include "mmnl/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mmnl {
namespace {

void check_dataset(const ChoiceDataset& data) {
  if (data.empty()) {
    throw DomainError("dataset has no observations");
  }
}

void check_theta(const Matrix& theta, const ChoiceDataset& data) {
  check_dataset(data);
  if (theta.rows() != data.num_types() || theta.cols() != data.num_items()) {
    throw DomainError("theta is " + std::to_string(theta.rows()) + "x" +
                      std::to_string(theta.cols()) + " but the dataset is " +
                      std::to_string(data.num_types()) + "x" + std::to_string(data.num_items()));
  }
}

void check_factors(const FactorPair& f, const ChoiceDataset& data) {
  check_dataset(data);
  if (f.u.cols() < 1 || f.u.cols() != f.v.cols()) {
    throw DomainError("factor column counts differ or are zero");
  }
  if (f.u.rows() != data.num_types() || f.v.rows() != data.num_items()) {
    throw DomainError("factor row counts do not match the dataset dimensions");
  }
}

// Softmax of -scores over one assortment. On return `weights` holds the
// normalized choice probabilities and the return value is
//   log sum_j exp(scores[chosen] - scores[j])
// computed with the minimum score shifted out, so it is exactly >= 0.
double softmin_term(std::span<const double> scores, std::size_t chosen_pos,
                    std::vector<double>& weights) {
  const double lo = *std::min_element(scores.begin(), scores.end());
  weights.resize(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    weights[k] = std::exp(lo - scores[k]);
    total += weights[k];
  }
  for (double& w : weights) w /= total;
  return (scores[chosen_pos] - lo) + std::log(total);
}

std::size_t position_of(std::span<const int> assortment, int item) {
  const auto it = std::find(assortment.begin(), assortment.end(), item);
  return static_cast<std::size_t>(it - assortment.begin());
}

}  // namespace

double choice_prob(std::span<const double> theta_row, std::span<const int> assortment, int item) {
  if (assortment.empty()) {
    throw DomainError("choice_prob: empty assortment");
  }
  const std::size_t pos = position_of(assortment, item);
  if (pos == assortment.size()) {
    throw DomainError("choice_prob: item " + std::to_string(item) + " is not in the assortment");
  }
  std::vector<double> scores;
  scores.reserve(assortment.size());
  for (const int j : assortment) {
    if (j < 0 || static_cast<std::size_t>(j) >= theta_row.size()) {
      throw DomainError("choice_prob: assortment item out of range");
    }
    if (!std::isfinite(theta_row[j])) {
      throw DomainError("choice_prob: non-finite parameter");
    }
    scores.push_back(theta_row[j]);
  }
  std::vector<double> probs;
  softmin_term(scores, pos, probs);
  return probs[pos];
}

double neg_log_likelihood(const Matrix& theta, const ChoiceDataset& data) {
  check_theta(theta, data);
  std::vector<double> scores, probs;
  double total = 0.0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    const ObservationView obs = data[t];
    scores.clear();
    for (const int j : obs.assortment) scores.push_back(theta(obs.type_index, j));
    total += softmin_term(scores, position_of(obs.assortment, obs.chosen_item), probs);
  }
  return total / static_cast<double>(data.size());
}

Matrix nll_gradient(const Matrix& theta, const ChoiceDataset& data) {
  check_theta(theta, data);
  Matrix grad = Matrix::Zero(theta.rows(), theta.cols());
  const double inv_t = 1.0 / static_cast<double>(data.size());
  std::vector<double> scores, probs;
  for (std::size_t t = 0; t < data.size(); ++t) {
    const ObservationView obs = data[t];
    scores.clear();
    for (const int j : obs.assortment) scores.push_back(theta(obs.type_index, j));
    softmin_term(scores, 0, probs);
    grad(obs.type_index, obs.chosen_item) += inv_t;
    for (std::size_t k = 0; k < obs.assortment.size(); ++k) {
      grad(obs.type_index, obs.assortment[k]) -= inv_t * probs[k];
    }
  }
  return grad;
}

double factored_objective(const FactorPair& factors, const ChoiceDataset& data, double lambda) {
  FactoredEvaluator evaluator(data);
  return evaluator.objective(factors, lambda);
}

FactorGradients factored_gradients(const FactorPair& factors, const ChoiceDataset& data,
                                   double lambda) {
  FactoredEvaluator evaluator(data);
  return evaluator.gradients(factors, lambda);
}

FactoredEvaluator::FactoredEvaluator(const ChoiceDataset& data) : data_(data) {
  check_dataset(data);
  chosen_pos_.resize(data.size());
  for (std::size_t t = 0; t < data.size(); ++t) {
    chosen_pos_[t] = static_cast<int>(position_of(data[t].assortment, data[t].chosen_item));
  }
  probs_.resize(data.items().size());
}

double FactoredEvaluator::compute_probabilities(const FactorPair& factors) {
  check_factors(factors, data_);
  if (cache_valid_ && cached_at_.u.cols() == factors.u.cols() && cached_at_.u == factors.u &&
      cached_at_.v == factors.v) {
    return cached_fit_;
  }
  ++probability_passes_;

  const Eigen::Index rank = factors.u.cols();
  const double* u = factors.u.data();
  const double* v = factors.v.data();
  const auto types = data_.types();
  const auto offsets = data_.offsets();
  const auto items = data_.items();
  const std::size_t count = data_.size();

  // Pass 1: scores, shifted so the smallest score in each assortment maps
  // to exp(0) = 1. The chosen item's shifted gap is kept aside.
  double fit = 0.0;
  std::vector<double> gaps(count);
  for (std::size_t t = 0; t < count; ++t) {
    const double* u_row = u + types[t] * rank;
    const std::size_t begin = offsets[t];
    const std::size_t end = offsets[t + 1];
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t p = begin; p < end; ++p) {
      const double* v_row = v + static_cast<Eigen::Index>(items[p]) * rank;
      double score = 0.0;
      for (Eigen::Index k = 0; k < rank; ++k) score += u_row[k] * v_row[k];
      probs_[p] = score;
      lo = std::min(lo, score);
    }
    gaps[t] = probs_[begin + chosen_pos_[t]] - lo;
    for (std::size_t p = begin; p < end; ++p) probs_[p] = lo - probs_[p];
  }

  // Pass 2: one vectorized exp over every assortment entry.
  Eigen::Map<Eigen::ArrayXd> flat(probs_.data(), static_cast<Eigen::Index>(probs_.size()));
  flat = flat.exp();

  // Pass 3: normalize and accumulate log terms in dataset order.
  for (std::size_t t = 0; t < count; ++t) {
    double total = 0.0;
    for (std::size_t p = offsets[t]; p < offsets[t + 1]; ++p) total += probs_[p];
    const double inv_total = 1.0 / total;
    for (std::size_t p = offsets[t]; p < offsets[t + 1]; ++p) probs_[p] *= inv_total;
    fit += gaps[t] + std::log(total);
  }
  fit /= static_cast<double>(count);

  cached_at_ = factors;
  cached_fit_ = fit;
  cache_valid_ = true;
  return fit;
}

double FactoredEvaluator::objective(const FactorPair& factors, double lambda) {
  ++objective_evals_;
  const double fit = compute_probabilities(factors);
  return fit + 0.5 * lambda * (factors.u.squaredNorm() + factors.v.squaredNorm());
}

FactorGradients FactoredEvaluator::gradients(const FactorPair& factors, double lambda) {
  compute_probabilities(factors);
  FactorGradients g{lambda * factors.u, lambda * factors.v};

  const Eigen::Index rank = factors.u.cols();
  const double* u = factors.u.data();
  const double* v = factors.v.data();
  double* gu = g.u.data();
  double* gv = g.v.data();
  const auto types = data_.types();
  const auto chosen = data_.chosen_items();
  const auto offsets = data_.offsets();
  const auto items = data_.items();
  const double inv_t = 1.0 / static_cast<double>(data_.size());
  std::vector<double> expected_v(static_cast<std::size_t>(rank));

  for (std::size_t t = 0; t < data_.size(); ++t) {
    const double* u_row = u + types[t] * rank;
    std::fill(expected_v.begin(), expected_v.end(), 0.0);
    for (std::size_t p = offsets[t]; p < offsets[t + 1]; ++p) {
      const Eigen::Index j = items[p];
      const double* v_row = v + j * rank;
      double* gv_row = gv + j * rank;
      const double weight = inv_t * probs_[p];
      for (Eigen::Index k = 0; k < rank; ++k) {
        expected_v[k] += probs_[p] * v_row[k];
        gv_row[k] -= weight * u_row[k];
      }
    }
    const Eigen::Index jt = chosen[t];
    double* gv_chosen = gv + jt * rank;
    const double* v_chosen = v + jt * rank;
    double* gu_row = gu + types[t] * rank;
    for (Eigen::Index k = 0; k < rank; ++k) {
      gv_chosen[k] += inv_t * u_row[k];
      gu_row[k] += inv_t * (v_chosen[k] - expected_v[k]);
    }
  }
  return g;
}

}  // namespace mmnl
