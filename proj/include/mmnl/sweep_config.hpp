#pragma once

#include <istream>
#include <string>
#include <vector>

#include "mmnl/harness.hpp"

namespace mmnl {

/// Parses a sweep grid file. See docs/sweep_config.md for the schema.
/// Errors are ParseError naming the line and the offending field.
std::vector<ExperimentConfig> parse_sweep_config(std::istream& in);
std::vector<ExperimentConfig> load_sweep_config(const std::string& path);

}  // namespace mmnl
