#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmnl {

// Row-major so that per-type rows of theta and per-item rows of the factors
// are contiguous; every hot loop walks one row at a time.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// An m x n parameter matrix. Rows index customer types, columns index items,
// and entries are negated nominal utilities. Estimates and generated truths
// are row-centered (each row sums to zero).
using ParamMatrix = Matrix;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChoiceObservation {
  int type_index = 0;
  int chosen_item = 0;
  std::vector<int> assortment;
};

// Non-owning view of one observation stored inside a ChoiceDataset.
struct ObservationView {
  int type_index;
  int chosen_item;
  std::span<const int> assortment;
};

/// An ordered sequence of assortment-choice observations over m types and
/// n items. Assortments are stored flattened and sorted ascending; add()
/// validates every observation against the dimensions.
class ChoiceDataset {
 public:
  ChoiceDataset() = default;
  ChoiceDataset(int num_types, int num_items);

  int num_types() const { return num_types_; }
  int num_items() const { return num_items_; }
  std::size_t size() const { return types_.size(); }
  bool empty() const { return types_.empty(); }

  void reserve(std::size_t observations, std::size_t total_assortment_items);

  /// Appends an observation. Throws DomainError if an index is out of range,
  /// the assortment is empty or has duplicates, or the chosen item is not in
  /// the assortment.
  void add(int type_index, int chosen_item, std::span<const int> assortment);
  void add(const ChoiceObservation& obs) { add(obs.type_index, obs.chosen_item, obs.assortment); }

  ObservationView operator[](std::size_t t) const {
    return {types_[t], chosen_[t],
            std::span<const int>(items_.data() + offsets_[t], offsets_[t + 1] - offsets_[t])};
  }
  ChoiceObservation observation(std::size_t t) const;

  std::size_t max_assortment_size() const;

  // Flattened storage: assortment t occupies items()[offsets()[t] .. offsets()[t+1]).
  std::span<const int> types() const { return types_; }
  std::span<const int> chosen_items() const { return chosen_; }
  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const int> items() const { return items_; }

  /// Observations of one type, in dataset order.
  ChoiceDataset subset_of_type(int type_index) const;

 private:
  int num_types_ = 0;
  int num_items_ = 0;
  std::vector<int> types_;
  std::vector<int> chosen_;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> items_;
  std::vector<int> scratch_;
};

/// Factors of theta = U V^T; U is m x r, V is n x r.
struct FactorPair {
  Matrix u;
  Matrix v;

  int rank() const { return static_cast<int>(u.cols()); }
};

struct SvdResult {
  Matrix left_vectors;     // m x k, orthonormal columns
  Vector singular_values;  // nonincreasing, nonnegative
  Matrix right_vectors;    // n x k, orthonormal columns
};

}  // namespace mmnl
