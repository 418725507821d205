#pragma once

#include <cstdint>
#include <vector>

#include "mmnl/random.hpp"
#include "mmnl/types.hpp"

namespace mmnl {

struct GeneratorConfig {
  int m = 100;
  int n = 100;
  int rank = 2;
  long long num_obs = 100000;  // T
  int assortment_size = 10;    // K
  std::uint64_t seed = 0;

  /// Throws DomainError on out-of-range fields.
  void validate() const;
};

/// Standard normal m x n draw truncated to its top `rank` singular
/// components and scaled to unit sample standard deviation (denominator
/// mn - 1). Not row-centered.
Matrix normalized_low_rank_draw(const GeneratorConfig& config, Rng& rng);

/// Row-centered ground truth: row_center(normalized_low_rank_draw(...)).
ParamMatrix generate_truth(const GeneratorConfig& config, Rng& rng);

/// Draws uniform K-subsets of {0, ..., n-1} by partial Fisher-Yates over a
/// workspace that is reused across draws.
class AssortmentSampler {
 public:
  explicit AssortmentSampler(int n);

  /// Writes a uniformly random subset of size k, ascending, into `out`.
  void sample(int k, Rng& rng, std::vector<int>& out);

  int num_items() const { return static_cast<int>(perm_.size()); }

 private:
  std::vector<int> perm_;
};

std::vector<int> sample_assortment(int n, int k, Rng& rng);

/// T observations: type uniform over rows, assortment uniform of size K,
/// choice drawn by inverse CDF from the MNL probabilities of `truth`
/// (assortment walked in ascending item order).
ChoiceDataset sample_dataset(const Matrix& truth, const GeneratorConfig& config, Rng& rng);

}  // namespace mmnl
