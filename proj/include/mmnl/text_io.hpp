#pragma once

#include <iosfwd>
#include <string>

#include "mmnl/types.hpp"

namespace mmnl {

// Matrix text format:
//   line 1: "m n"
//   then m lines of n space-separated values with 17 significant digits.
void write_matrix(std::ostream& out, const Matrix& matrix);
Matrix read_matrix(std::istream& in);
void save_matrix(const std::string& path, const Matrix& matrix);
Matrix load_matrix(const std::string& path);

// Dataset text format:
//   line 1: "m n T"
//   then T lines "i j k j1 ... jk" (0-based, members ascending).
void write_dataset(std::ostream& out, const ChoiceDataset& data);
ChoiceDataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const ChoiceDataset& data);
ChoiceDataset load_dataset(const std::string& path);

/// "%.17g" rendering shared by every text output.
std::string format_double(double value);

}  // namespace mmnl
