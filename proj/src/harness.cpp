#include "mmnl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mmnl/linalg.hpp"
#include "mmnl/text_io.hpp"

namespace mmnl {
namespace {

void check_lambda_inputs(double K, double d, double m, double n, double T) {
  if (!(K > 0 && m > 0 && n > 0 && T > 0)) {
    throw DomainError("lambda rule inputs K, m, n, T must be positive");
  }
  if (!(d > 1.0)) throw DomainError("lambda rule needs d > 1 so that ln d > 0");
}

}  // namespace

double lambda_theorem(double K, double d, double m, double n, double T) {
  check_lambda_inputs(K, d, m, n, T);
  return 32.0 * std::sqrt(K * d * std::log(d) / (m * n * T));
}

double lambda_practical(double K, double d, double m, double n, double T) {
  return lambda_theorem(K, d, m, n, T) / 256.0;
}

BoundInputs bound_inputs_from_truth(const Matrix& truth, double K, double T, int r) {
  BoundInputs in;
  in.m = static_cast<double>(truth.rows());
  in.n = static_cast<double>(truth.cols());
  in.d = 0.5 * (in.m + in.n);
  in.K = K;
  in.T = T;
  in.r = r;
  in.alpha = std::sqrt(in.m * in.n) * truth.cwiseAbs().maxCoeff();
  const int full = static_cast<int>(std::min(truth.rows(), truth.cols()));
  if (r < 0 || r > full) throw DomainError("bound rank outside [0, min(m, n)]");
  const SvdResult svd = svd_top_k(truth, full);
  in.sigma_tail = svd.singular_values.tail(full - r).sum();
  return in;
}

double theorem_bound(const BoundInputs& in) {
  if (!(in.d > 1.0)) throw DomainError("theorem_bound needs d > 1");
  if (!(in.alpha >= 0.0) || !(in.sigma_tail >= 0.0) || !(in.T > 0.0) || !(in.K > 0.0) ||
      !(in.m > 0.0) || !(in.n > 0.0) || !(in.r >= 0.0)) {
    throw DomainError("theorem_bound: invalid inputs");
  }
  const double rate = in.K * in.K * in.K * in.d * std::log(in.d) / in.T;
  const double estimation = std::sqrt(rate) * std::sqrt(in.r);
  const double approximation = std::pow(rate, 0.25) * std::pow(in.sigma_tail, 0.25);
  const double scale = 2048.0 * in.alpha * std::exp(6.0 * in.alpha / std::sqrt(in.m * in.n));
  return scale * std::max(estimation, approximation);
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kFgd:
      return "fgd";
    case Method::kMle:
      return "mle";
    case Method::kZero:
      return "zero";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "fgd") return Method::kFgd;
  if (name == "mle") return Method::kMle;
  if (name == "zero") return Method::kZero;
  throw DomainError("unknown method '" + name + "' (expected fgd, mle or zero)");
}

void ExperimentConfig::validate() const {
  generator.validate();
  if (replications < 1) throw DomainError("replications must be at least 1");
  if (lambda_rule == LambdaRule::kExplicit && !(explicit_lambda >= 0.0)) {
    throw DomainError("explicit lambda must be nonnegative");
  }
  if (rank_tilde && (*rank_tilde < 1 || *rank_tilde > std::min(generator.m, generator.n))) {
    throw DomainError("rank_tilde outside [1, min(m, n)]");
  }
  solver_config().validate();
  mle_options.validate();
}

double ExperimentConfig::lambda() const {
  if (lambda_rule == LambdaRule::kExplicit) return explicit_lambda;
  const double m = generator.m;
  const double n = generator.n;
  const double d = 0.5 * (m + n);
  const double K = generator.assortment_size;
  const double T = static_cast<double>(generator.num_obs);
  return lambda_rule == LambdaRule::kTheorem ? lambda_theorem(K, d, m, n, T)
                                             : lambda_practical(K, d, m, n, T);
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig s;
  s.lambda = lambda();
  s.rank_tilde = rank_tilde.value_or(std::min({2 * generator.rank, generator.m, generator.n}));
  s.beta_dec = beta_dec;
  s.tau = tau;
  s.max_outer_iters = max_outer_iters;
  s.max_linesearch_iters = max_linesearch_iters;
  return s;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config,
                                             std::vector<std::string>* warnings) {
  config.validate();
  const GeneratorConfig& gen = config.generator;
  const double d = 0.5 * (gen.m + gen.n);
  if (warnings && static_cast<double>(gen.num_obs) > d * d * std::log(d)) {
    warnings->push_back("T=" + std::to_string(gen.num_obs) +
                        " exceeds d^2 ln d; the error bound's sample-size hypothesis fails");
  }
  const SolverConfig solver = config.solver_config();

  std::vector<ExperimentRecord> records;
  for (int rep = 0; rep < config.replications; ++rep) {
    GeneratorConfig rep_gen = gen;
    rep_gen.seed = config.base_seed + static_cast<std::uint64_t>(rep);
    Rng rng(rep_gen.seed);
    const ParamMatrix truth = generate_truth(rep_gen, rng);
    const ChoiceDataset data = sample_dataset(truth, rep_gen, rng);
    const double bound = theorem_bound(bound_inputs_from_truth(
        truth, gen.assortment_size, static_cast<double>(gen.num_obs), gen.rank));

    for (const Method method : config.methods) {
      ExperimentRecord rec;
      rec.m = gen.m;
      rec.n = gen.n;
      rec.r = gen.rank;
      rec.T = gen.num_obs;
      rec.K = gen.assortment_size;
      rec.method = method;
      rec.lambda = solver.lambda;
      rec.seed = rep_gen.seed;
      rec.theorem_bound = bound;
      try {
        ParamMatrix estimate;
        switch (method) {
          case Method::kFgd: {
            FitResult res = fit(data, solver);
            estimate = std::move(res.estimate);
            rec.outer_iters = res.outer_iters;
            rec.wall_time_seconds = res.wall_time_seconds;
            rec.converged = res.converged;
            if (warnings) {
              for (auto& w : res.warnings) warnings->push_back("fgd: " + w);
            }
            break;
          }
          case Method::kMle: {
            const auto start = std::chrono::steady_clock::now();
            MleResult res = fit_mle(data, config.mle_options);
            rec.wall_time_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            estimate = std::move(res.estimate);
            for (const RowFitReport& r : res.reports) {
              rec.outer_iters = std::max(rec.outer_iters, r.iterations);
            }
            rec.converged = res.all_converged();
            break;
          }
          case Method::kZero:
            estimate = ParamMatrix::Zero(gen.m, gen.n);
            rec.converged = true;
            break;
        }
        rec.frob_error = (estimate - truth).norm();
        rec.rmse = rmse(estimate, truth);
      } catch (const std::exception& e) {
        rec.converged = false;
        rec.rmse = std::numeric_limits<double>::quiet_NaN();
        rec.frob_error = std::numeric_limits<double>::quiet_NaN();
        rec.error = e.what();
        if (warnings) warnings->push_back(to_string(method) + " failed: " + e.what());
      }
      if (rec.frob_error > rec.theorem_bound) {
        throw NumericalError(to_string(method) + " error " + format_double(rec.frob_error) +
                             " exceeds the theoretical bound " + format_double(rec.theorem_bound) +
                             " (seed " + std::to_string(rec.seed) + ")");
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

const char* const kResultsHeader =
    "m,n,r,T,K,method,lambda,seed,rmse,frob_error,theorem_bound,outer_iters,wall_time_seconds,"
    "converged";

std::string to_csv_row(const ExperimentRecord& r) {
  std::ostringstream out;
  out << r.m << ',' << r.n << ',' << r.r << ',' << r.T << ',' << r.K << ',' << to_string(r.method)
      << ',' << format_double(r.lambda) << ',' << r.seed << ',' << format_double(r.rmse) << ','
      << format_double(r.frob_error) << ',' << format_double(r.theorem_bound) << ','
      << r.outer_iters << ',' << format_double(r.wall_time_seconds) << ','
      << (r.converged ? "true" : "false");
  return out.str();
}

std::vector<ExperimentRecord> parse_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("results CSV is empty; expected a header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::string> expected;
  {
    std::stringstream ss(kResultsHeader);
    std::string cell;
    while (std::getline(ss, cell, ',')) expected.push_back(cell);
  }
  for (const std::string& col : expected) {
    if (std::find(header.begin(), header.end(), col) == header.end()) {
      throw ParseError("results CSV is missing column '" + col + "'");
    }
  }
  auto column = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) -
                                    header.begin());
  };

  std::vector<ExperimentRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw ParseError("results CSV line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    try {
      ExperimentRecord r;
      r.m = std::stoi(cells[column("m")]);
      r.n = std::stoi(cells[column("n")]);
      r.r = std::stoi(cells[column("r")]);
      r.T = std::stoll(cells[column("T")]);
      r.K = std::stoi(cells[column("K")]);
      r.method = method_from_string(cells[column("method")]);
      r.lambda = std::stod(cells[column("lambda")]);
      r.seed = std::stoull(cells[column("seed")]);
      r.rmse = std::stod(cells[column("rmse")]);
      r.frob_error = std::stod(cells[column("frob_error")]);
      r.theorem_bound = std::stod(cells[column("theorem_bound")]);
      r.outer_iters = std::stoi(cells[column("outer_iters")]);
      r.wall_time_seconds = std::stod(cells[column("wall_time_seconds")]);
      r.converged = cells[column("converged")] == "true";
      records.push_back(r);
    } catch (const std::exception& e) {
      throw ParseError("results CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void sweep(const std::vector<ExperimentConfig>& grid, const std::string& output_path,
           std::ostream* progress) {
  if (grid.empty()) throw DomainError("sweep grid is empty");
  std::ofstream out(output_path);
  if (!out) throw IoError("cannot open '" + output_path + "' for writing");
  out << kResultsHeader << '\n' << std::flush;
  for (const ExperimentConfig& config : grid) {
    std::vector<std::string> warnings;
    const std::vector<ExperimentRecord> records = run_experiment(config, &warnings);
    if (progress) {
      for (const std::string& w : warnings) *progress << "warning: " << w << '\n';
    }
    for (const ExperimentRecord& rec : records) {
      out << to_csv_row(rec) << '\n' << std::flush;
      if (!out) throw IoError("write failed for '" + output_path + "'");
      if (progress) {
        *progress << "m=" << rec.m << " n=" << rec.n << " r=" << rec.r << " T=" << rec.T
                  << " K=" << rec.K << " method=" << to_string(rec.method)
                  << " seed=" << rec.seed << " rmse=" << format_double(rec.rmse) << '\n'
                  << std::flush;
      }
    }
  }
}

}  // namespace mmnl
