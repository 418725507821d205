#include "mmnl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mmnl/linalg.hpp"

namespace mmnl {

double Rng::normal() {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double radius = std::sqrt(-2.0 * std::log(1.0 - uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  return radius * std::cos(angle);
}

void GeneratorConfig::validate() const {
  if (m < 1 || n < 1) {
    throw DomainError("m and n must be positive, got m=" + std::to_string(m) +
                      " n=" + std::to_string(n));
  }
  if (rank < 1 || rank > std::min(m, n)) {
    throw DomainError("rank " + std::to_string(rank) + " outside [1, min(m, n)=" +
                      std::to_string(std::min(m, n)) + "]");
  }
  if (num_obs < 1) throw DomainError("T must be positive");
  if (assortment_size < 2 || assortment_size > n) {
    throw DomainError("assortment size K=" + std::to_string(assortment_size) +
                      " outside [2, n=" + std::to_string(n) + "]");
  }
}

Matrix normalized_low_rank_draw(const GeneratorConfig& config, Rng& rng) {
  config.validate();
  Matrix draw(config.m, config.n);
  for (Eigen::Index i = 0; i < draw.rows(); ++i) {
    for (Eigen::Index j = 0; j < draw.cols(); ++j) draw(i, j) = rng.normal();
  }

  if (config.rank < std::min(config.m, config.n)) {
    const SvdResult svd = svd_top_k(draw, config.rank);
    draw = svd.left_vectors * svd.singular_values.asDiagonal() * svd.right_vectors.transpose();
  }

  const double count = static_cast<double>(draw.size());
  const double mean = draw.mean();
  const double variance = (draw.array() - mean).square().sum() / (count - 1.0);
  if (!(variance > 0.0)) {
    throw NumericalError("generated matrix has zero sample variance");
  }
  return draw / std::sqrt(variance);
}

ParamMatrix generate_truth(const GeneratorConfig& config, Rng& rng) {
  return row_center(normalized_low_rank_draw(config, rng));
}

AssortmentSampler::AssortmentSampler(int n) : perm_(static_cast<std::size_t>(std::max(n, 0))) {
  if (n < 1) throw DomainError("assortment sampler needs at least one item");
  for (int j = 0; j < n; ++j) perm_[j] = j;
}

void AssortmentSampler::sample(int k, Rng& rng, std::vector<int>& out) {
  const int n = num_items();
  if (k < 1 || k > n) {
    throw DomainError("assortment size " + std::to_string(k) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  for (int q = 0; q < k; ++q) {
    const auto pick = q + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - q)));
    std::swap(perm_[q], perm_[pick]);
  }
  out.assign(perm_.begin(), perm_.begin() + k);
  std::sort(out.begin(), out.end());
}

std::vector<int> sample_assortment(int n, int k, Rng& rng) {
  AssortmentSampler sampler(n);
  std::vector<int> out;
  sampler.sample(k, rng, out);
  return out;
}

ChoiceDataset sample_dataset(const Matrix& truth, const GeneratorConfig& config, Rng& rng) {
  config.validate();
  if (truth.rows() != config.m || truth.cols() != config.n) {
    throw DomainError("truth matrix shape does not match the generator config");
  }
  const auto num_obs = static_cast<std::size_t>(config.num_obs);
  ChoiceDataset data(config.m, config.n);
  data.reserve(num_obs, num_obs * static_cast<std::size_t>(config.assortment_size));

  AssortmentSampler sampler(config.n);
  std::vector<int> assortment;
  std::vector<double> weights(static_cast<std::size_t>(config.assortment_size));
  for (std::size_t t = 0; t < num_obs; ++t) {
    const int type = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(config.m)));
    sampler.sample(config.assortment_size, rng, assortment);

    double lo = truth(type, assortment[0]);
    for (const int j : assortment) lo = std::min(lo, truth(type, j));
    double total = 0.0;
    for (std::size_t k = 0; k < assortment.size(); ++k) {
      weights[k] = std::exp(lo - truth(type, assortment[k]));
      total += weights[k];
    }
    const double target = rng.uniform() * total;
    std::size_t pick = assortment.size() - 1;
    double cumulative = 0.0;
    for (std::size_t k = 0; k < assortment.size(); ++k) {
      cumulative += weights[k];
      if (target < cumulative) {
        pick = k;
        break;
      }
    }
    data.add(type, assortment[pick], assortment);
  }
  return data;
}

}  // namespace mmnl
