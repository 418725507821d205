// Command-line driver: generate | fit | evaluate | sweep | plot.
//
// Exit codes: 0 success, 2 usage error, 1 runtime error. Diagnostics go to
// stderr; data goes to files or stdout.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmnl/fgd.hpp"
#include "mmnl/harness.hpp"
#include "mmnl/likelihood.hpp"
#include "mmnl/linalg.hpp"
#include "mmnl/mle.hpp"
#include "mmnl/plot.hpp"
#include "mmnl/sweep_config.hpp"
#include "mmnl/synthetic.hpp"
#include "mmnl/text_io.hpp"

namespace {

using namespace mmnl;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateArgs {
  GeneratorConfig config;
  std::string out_data;
  std::string out_truth;
};

struct FitArgs {
  std::string method;
  std::string data;
  std::string out;
  std::optional<double> lambda;
  std::optional<std::string> lambda_rule;
  std::optional<int> rank_tilde;
  std::optional<int> rank;
  double beta_dec = 0.8;
  double tol = 1e-10;
  std::optional<int> max_iters;
  int max_linesearch_iters = 100;
  double grad_tol = 1e-8;
  double ridge = 1e-8;
  std::string report;
};

struct EvaluateArgs {
  std::string estimate;
  std::string truth;
  bool bound = false;
  std::optional<int> K;
  std::optional<long long> T;
  std::optional<int> rank;
  bool porcelain = false;
};

struct SweepArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct PlotArgs {
  std::string results;
  std::string x_axis = "size";
  std::string out;
  std::string title;
};

int run_generate(const GenerateArgs& a) {
  try {
    a.config.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  Rng rng(a.config.seed);
  const ParamMatrix truth = generate_truth(a.config, rng);
  const ChoiceDataset data = sample_dataset(truth, a.config, rng);
  save_dataset(a.out_data, data);
  save_matrix(a.out_truth, truth);
  std::cout << "generated m=" << a.config.m << " n=" << a.config.n << " rank=" << a.config.rank
            << " T=" << a.config.num_obs << " K=" << a.config.assortment_size
            << " seed=" << a.config.seed << '\n';
  return 0;
}

int run_fit(const FitArgs& a) {
  if (a.lambda && a.lambda_rule) {
    throw UsageError("--lambda and --lambda-rule are mutually exclusive");
  }
  if (a.method != "fgd" && a.method != "mle") {
    throw UsageError("--method must be fgd or mle");
  }
  const ChoiceDataset data = load_dataset(a.data);
  if (data.empty()) throw DomainError("dataset has no observations");
  const int m = data.num_types();
  const int n = data.num_items();

  if (a.method == "mle") {
    RowFitOptions opts;
    opts.grad_tol = a.grad_tol;
    opts.ridge = a.ridge;
    if (a.max_iters) opts.max_iters = *a.max_iters;
    try {
      opts.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    const auto start = std::chrono::steady_clock::now();
    const MleResult res = fit_mle(data, opts);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_matrix(a.out, res.estimate);
    if (!a.report.empty()) {
      std::ofstream report(a.report);
      if (!report) throw IoError("cannot open '" + a.report + "' for writing");
      report << res.summary();
    }
    int max_iters = 0, failed = 0;
    for (const RowFitReport& r : res.reports) {
      max_iters = std::max(max_iters, r.iterations);
      failed += r.converged ? 0 : 1;
    }
    std::cout << "method=mle rows=" << m << " nonconverged_rows=" << failed
              << " max_iterations=" << max_iters << " wall_time_seconds=" << format_double(seconds)
              << '\n';
    return 0;
  }

  SolverConfig cfg;
  const double d = 0.5 * (m + n);
  const double K = static_cast<double>(data.max_assortment_size());
  const double T = static_cast<double>(data.size());
  if (a.lambda) {
    cfg.lambda = *a.lambda;
  } else {
    const std::string rule = a.lambda_rule.value_or("practical");
    if (rule == "theorem") {
      cfg.lambda = lambda_theorem(K, d, m, n, T);
    } else if (rule == "practical") {
      cfg.lambda = lambda_practical(K, d, m, n, T);
    } else {
      throw UsageError("--lambda-rule must be theorem or practical");
    }
  }
  if (a.rank_tilde) {
    cfg.rank_tilde = *a.rank_tilde;
  } else if (a.rank) {
    cfg.rank_tilde = std::min({2 * *a.rank, m, n});
  } else {
    cfg.rank_tilde = std::min(m, n);
  }
  cfg.beta_dec = a.beta_dec;
  cfg.tau = a.tol;
  if (a.max_iters) cfg.max_outer_iters = *a.max_iters;
  cfg.max_linesearch_iters = a.max_linesearch_iters;
  try {
    cfg.validate();
    if (cfg.rank_tilde > std::min(m, n)) throw DomainError("--rank-tilde exceeds min(m, n)");
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  const FitResult res = fit(data, cfg);
  for (const std::string& w : res.warnings) std::cerr << "warning: " << w << '\n';
  save_matrix(a.out, res.estimate);
  std::cout << "method=fgd lambda=" << format_double(cfg.lambda) << " rank_tilde=" << cfg.rank_tilde
            << " objective=" << format_double(res.objective_trace.back())
            << " iterations=" << res.outer_iters << " converged=" << (res.converged ? "true" : "false")
            << " wall_time_seconds=" << format_double(res.wall_time_seconds) << '\n';
  return 0;
}

int run_evaluate(const EvaluateArgs& a) {
  if (a.bound && !(a.K && a.T && a.rank)) {
    throw UsageError("--bound requires --K, --T and --rank");
  }
  const Matrix estimate = load_matrix(a.estimate);
  const Matrix truth = load_matrix(a.truth);
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw DomainError("shape mismatch: estimate is " + std::to_string(estimate.rows()) + "x" +
                      std::to_string(estimate.cols()) + ", truth is " +
                      std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()));
  }
  const double error = rmse(estimate, truth);
  const double frob = (estimate - truth).norm();

  std::vector<std::pair<std::string, std::string>> fields = {
      {"rmse", format_double(error)}, {"frob_error", format_double(frob)}};
  if (a.bound) {
    const BoundInputs in =
        bound_inputs_from_truth(truth, *a.K, static_cast<double>(*a.T), *a.rank);
    const double bound = theorem_bound(in);
    fields.emplace_back("alpha", format_double(in.alpha));
    fields.emplace_back("sigma_tail", format_double(in.sigma_tail));
    fields.emplace_back("theorem_bound", format_double(bound));
    fields.emplace_back("within_bound", frob <= bound ? "true" : "false");
  }
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (a.porcelain) {
      std::cout << (k ? " " : "") << fields[k].first << '=' << fields[k].second;
    } else {
      std::cout << fields[k].first << " = " << fields[k].second << '\n';
    }
  }
  if (a.porcelain) std::cout << '\n';
  return 0;
}

int run_sweep(const SweepArgs& a) {
  std::vector<ExperimentConfig> grid = load_sweep_config(a.config);
  if (a.seed) {
    for (ExperimentConfig& c : grid) c.base_seed = *a.seed;
  }
  sweep(grid, a.out, &std::cerr);
  return 0;
}

int run_plot(const PlotArgs& a) {
  PlotSpec spec;
  try {
    spec.x_axis = plot_axis_from_string(a.x_axis);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  spec.title = a.title;
  std::ifstream in(a.results);
  if (!in) throw IoError("cannot open '" + a.results + "' for reading");
  const std::string svg = emit_plot(in, spec);
  std::ofstream out(a.out);
  if (!out) throw IoError("cannot open '" + a.out + "' for writing");
  out << svg;
  if (!out) throw IoError("write failed for '" + a.out + "'");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank mixed multinomial logit estimation from assortment choices"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a ground truth and a choice dataset");
  generate->add_option("--m", gen.config.m, "Number of customer types")->required();
  generate->add_option("--n", gen.config.n, "Number of items")->required();
  generate->add_option("--rank", gen.config.rank, "Rank of the ground truth")->required();
  generate->add_option("--T", gen.config.num_obs, "Number of observations")->required();
  generate->add_option("--K", gen.config.assortment_size, "Assortment size")->required();
  generate->add_option("--seed", gen.config.seed, "Random seed")->required();
  generate->add_option("--out-data", gen.out_data, "Dataset output path")->required();
  generate->add_option("--out-truth", gen.out_truth, "Truth matrix output path")->required();

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate the parameter matrix from a dataset");
  fit_cmd->add_option("--method", fit_args.method, "fgd or mle")->required();
  fit_cmd->add_option("--data", fit_args.data, "Dataset path")->required();
  fit_cmd->add_option("--out", fit_args.out, "Estimate output path")->required();
  fit_cmd->add_option("--lambda", fit_args.lambda, "Explicit regularization weight (fgd)");
  fit_cmd->add_option("--lambda-rule", fit_args.lambda_rule, "theorem or practical (fgd)");
  fit_cmd->add_option("--rank-tilde", fit_args.rank_tilde, "Factor rank (fgd)");
  fit_cmd->add_option("--rank", fit_args.rank, "Truth rank r; factor rank defaults to 2r (fgd)");
  fit_cmd->add_option("--beta-dec", fit_args.beta_dec, "Line-search shrink factor (fgd)");
  fit_cmd->add_option("--tol", fit_args.tol, "Relative-decrease tolerance (fgd)");
  fit_cmd->add_option("--max-iters", fit_args.max_iters, "Iteration cap");
  fit_cmd->add_option("--max-linesearch-iters", fit_args.max_linesearch_iters,
                      "Line-search trial cap (fgd)");
  fit_cmd->add_option("--grad-tol", fit_args.grad_tol, "Gradient-norm tolerance (mle)");
  fit_cmd->add_option("--ridge", fit_args.ridge, "Newton Hessian ridge (mle)");
  fit_cmd->add_option("--report", fit_args.report, "Per-row convergence report path (mle)");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Compare an estimate against the truth");
  evaluate->add_option("--estimate", eval_args.estimate, "Estimate matrix path")->required();
  evaluate->add_option("--truth", eval_args.truth, "Truth matrix path")->required();
  evaluate->add_flag("--bound", eval_args.bound, "Also compute the error bound diagnostic");
  evaluate->add_option("--K", eval_args.K, "Maximum assortment size (for --bound)");
  evaluate->add_option("--T", eval_args.T, "Number of observations (for --bound)");
  evaluate->add_option("--rank", eval_args.rank, "Truncation rank (for --bound)");
  evaluate->add_flag("--porcelain", eval_args.porcelain, "Single-line key=value output");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment grid into a results CSV");
  sweep_cmd->add_option("--config", sweep_args.config, "Sweep config path")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "Results CSV path")->required();
  sweep_cmd->add_option("--seed", sweep_args.seed, "Override every block's base seed");

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plot", "Render a results CSV as an SVG chart");
  plot->add_option("--results", plot_args.results, "Results CSV path")->required();
  plot->add_option("--x", plot_args.x_axis, "size or per-row");
  plot->add_option("--out", plot_args.out, "SVG output path")->required();
  plot->add_option("--title", plot_args.title, "Chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*fit_cmd) return run_fit(fit_args);
    if (*evaluate) return run_evaluate(eval_args);
    if (*sweep_cmd) return run_sweep(sweep_args);
    if (*plot) return run_plot(plot_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
