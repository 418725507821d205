#include "mmnl/types.hpp"

#include <algorithm>
#include <string>

namespace mmnl {

ChoiceDataset::ChoiceDataset(int num_types, int num_items)
    : num_types_(num_types), num_items_(num_items) {
  if (num_types < 1 || num_items < 1) {
    throw DomainError("dataset dimensions must be positive, got m=" + std::to_string(num_types) +
                      " n=" + std::to_string(num_items));
  }
}

void ChoiceDataset::reserve(std::size_t observations, std::size_t total_assortment_items) {
  types_.reserve(observations);
  chosen_.reserve(observations);
  offsets_.reserve(observations + 1);
  items_.reserve(total_assortment_items);
}

void ChoiceDataset::add(int type_index, int chosen_item, std::span<const int> assortment) {
  if (type_index < 0 || type_index >= num_types_) {
    throw DomainError("type index " + std::to_string(type_index) + " outside [0, " +
                      std::to_string(num_types_) + ")");
  }
  if (assortment.empty()) {
    throw DomainError("empty assortment");
  }
  scratch_.assign(assortment.begin(), assortment.end());
  std::sort(scratch_.begin(), scratch_.end());
  if (scratch_.front() < 0 || scratch_.back() >= num_items_) {
    throw DomainError("assortment item outside [0, " + std::to_string(num_items_) + ")");
  }
  if (std::adjacent_find(scratch_.begin(), scratch_.end()) != scratch_.end()) {
    throw DomainError("assortment contains duplicate items");
  }
  if (!std::binary_search(scratch_.begin(), scratch_.end(), chosen_item)) {
    throw DomainError("chosen item " + std::to_string(chosen_item) + " is not in the assortment");
  }
  types_.push_back(type_index);
  chosen_.push_back(chosen_item);
  items_.insert(items_.end(), scratch_.begin(), scratch_.end());
  offsets_.push_back(items_.size());
}

ChoiceObservation ChoiceDataset::observation(std::size_t t) const {
  const ObservationView view = (*this)[t];
  return {view.type_index, view.chosen_item,
          std::vector<int>(view.assortment.begin(), view.assortment.end())};
}

std::size_t ChoiceDataset::max_assortment_size() const {
  std::size_t largest = 0;
  for (std::size_t t = 0; t < size(); ++t) {
    largest = std::max(largest, offsets_[t + 1] - offsets_[t]);
  }
  return largest;
}

ChoiceDataset ChoiceDataset::subset_of_type(int type_index) const {
  ChoiceDataset out(num_types_, num_items_);
  for (std::size_t t = 0; t < size(); ++t) {
    if (types_[t] == type_index) {
      const ObservationView view = (*this)[t];
      out.add(view.type_index, view.chosen_item, view.assortment);
    }
  }
  return out;
}

}  // namespace mmnl
