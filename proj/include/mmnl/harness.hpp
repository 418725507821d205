#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mmnl/fgd.hpp"
#include "mmnl/mle.hpp"
#include "mmnl/synthetic.hpp"

namespace mmnl {

// Regularization weight from the error-bound analysis:
//   32 * sqrt(K d ln d / (m n T)).  Requires d > 1.
double lambda_theorem(double K, double d, double m, double n, double T);

// The smaller weight that works better in practice: lambda_theorem / 256.
double lambda_practical(double K, double d, double m, double n, double T);

struct BoundInputs {
  double alpha = 0.0;       // sqrt(mn) * max |truth|
  double K = 0.0;           // maximum assortment size
  double d = 0.0;           // (m + n) / 2
  double T = 0.0;
  double r = 1.0;           // truncation rank
  double sigma_tail = 0.0;  // sum of singular values past r
  double m = 0.0;
  double n = 0.0;
};

/// Measures alpha and the singular-value tail from a truth matrix.
BoundInputs bound_inputs_from_truth(const Matrix& truth, double K, double T, int r);

/// High-probability upper bound on |estimate - truth|_F:
///   2048 a exp(6a/sqrt(mn)) max{ sqrt(K^3 d ln d / T) sqrt(r),
///                                (K^3 d ln d / T)^{1/4} tail^{1/4} }.
double theorem_bound(const BoundInputs& inputs);

enum class Method { kFgd, kMle, kZero };
std::string to_string(Method method);
Method method_from_string(const std::string& name);

enum class LambdaRule { kTheorem, kPractical, kExplicit };

struct ExperimentConfig {
  GeneratorConfig generator;
  std::optional<int> rank_tilde;  // default 2 * rank, clipped to min(m, n)
  double beta_dec = 0.8;
  double tau = 1e-10;
  int max_outer_iters = 10000;
  int max_linesearch_iters = 100;
  LambdaRule lambda_rule = LambdaRule::kPractical;
  double explicit_lambda = 0.0;
  std::vector<Method> methods{Method::kFgd, Method::kMle, Method::kZero};
  int replications = 3;
  std::uint64_t base_seed = 0;
  RowFitOptions mle_options;

  void validate() const;
  /// lambda for this configuration's (K, d, m, n, T).
  double lambda() const;
  SolverConfig solver_config() const;
};

struct ExperimentRecord {
  int m = 0;
  int n = 0;
  int r = 0;
  long long T = 0;
  int K = 0;
  Method method = Method::kZero;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double frob_error = 0.0;
  double theorem_bound = 0.0;
  int outer_iters = 0;
  double wall_time_seconds = 0.0;
  bool converged = false;
  std::string error;  // set when the fit threw; not part of the CSV
};

/// Runs every replication and method. Each replication seeds one generator
/// with base_seed + replication, draws the truth, then the dataset. Fit
/// failures are recorded with converged = false instead of thrown.
/// `warnings`, if given, collects diagnostics such as T > d^2 ln d.
/// Throws NumericalError if any estimate violates theorem_bound.
std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config,
                                             std::vector<std::string>* warnings = nullptr);

extern const char* const kResultsHeader;
std::string to_csv_row(const ExperimentRecord& record);
std::vector<ExperimentRecord> parse_results_csv(std::istream& in);

/// Runs the grid in order, writing one flushed CSV row per record. The output
/// is opened before any computation. `progress`, if given, receives one line
/// per record.
void sweep(const std::vector<ExperimentConfig>& grid, const std::string& output_path,
           std::ostream* progress = nullptr);

}  // namespace mmnl
