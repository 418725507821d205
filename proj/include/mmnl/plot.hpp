#pragma once

#include <istream>
#include <string>
#include <vector>

#include "mmnl/harness.hpp"

namespace mmnl {

enum class PlotAxis {
  kSize,    // x = d = (m + n) / 2, one curve per method (and rank, if several)
  kPerRow,  // x = T / d, one curve per (method, d)
};

PlotAxis plot_axis_from_string(const std::string& name);  // "size" | "per-row"

struct PlotSpec {
  PlotAxis x_axis = PlotAxis::kSize;
  std::string title;
};

/// Standalone SVG log-log line chart of mean RMSE, averaged over replicates
/// sharing a curve and x value. Non-positive or non-finite RMSE values are
/// left out. Output depends only on the inputs.
std::string emit_plot(const std::vector<ExperimentRecord>& records, const PlotSpec& spec);
std::string emit_plot(std::istream& results_csv, const PlotSpec& spec);

}  // namespace mmnl
