#include "mmnl/sweep_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mmnl/text_io.hpp"

namespace mmnl {
namespace {

struct Entry {
  std::string key;
  std::vector<std::string> values;
  int line = 0;
};

struct Block {
  int line = 0;
  std::vector<Entry> entries;
};

const std::vector<std::string> kKeys = {
    "m",         "n",        "d",           "rank",          "T",         "T_per_d",
    "K",         "seed",     "replications", "methods",      "lambda_rule", "lambda",
    "rank_tilde", "beta_dec", "tol",         "max_iters",     "max_linesearch_iters",
    "mle_grad_tol", "mle_max_iters"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string& field, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": field '" + field + "': " + what);
}

long long as_int(const Entry& e, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    fail(e.line, e.key, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) fail(e.line, e.key, "expected an integer, got '" + v + "'");
  return out;
}

double as_double(const Entry& e, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    fail(e.line, e.key, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) fail(e.line, e.key, "expected a number, got '" + v + "'");
  return out;
}

// Builds one configuration from fully resolved single values.
ExperimentConfig build(const std::vector<Entry>& entries,
                       const std::map<std::string, std::string>& values, int block_line) {
  std::map<std::string, const Entry*> by_key;
  for (const Entry& e : entries) by_key[e.key] = &e;
  auto has = [&](const char* k) { return values.count(k) > 0; };
  auto entry = [&](const char* k) -> const Entry& { return *by_key.at(k); };
  auto get_int = [&](const char* k) { return as_int(entry(k), values.at(k)); };
  auto get_double = [&](const char* k) { return as_double(entry(k), values.at(k)); };

  ExperimentConfig cfg;
  GeneratorConfig& gen = cfg.generator;
  if (has("d")) {
    if (has("m") || has("n")) fail(entry("d").line, "d", "cannot be combined with m or n");
    gen.m = gen.n = static_cast<int>(get_int("d"));
  } else {
    if (!has("m")) fail(block_line, "m", "missing (set m and n, or d)");
    if (!has("n")) fail(block_line, "n", "missing (set m and n, or d)");
    gen.m = static_cast<int>(get_int("m"));
    gen.n = static_cast<int>(get_int("n"));
  }
  if (!has("rank")) fail(block_line, "rank", "missing");
  gen.rank = static_cast<int>(get_int("rank"));
  if (!has("K")) fail(block_line, "K", "missing");
  gen.assortment_size = static_cast<int>(get_int("K"));

  if (has("T") && has("T_per_d")) fail(entry("T").line, "T", "cannot be combined with T_per_d");
  if (has("T")) {
    gen.num_obs = get_int("T");
  } else if (has("T_per_d")) {
    gen.num_obs = std::llround(get_double("T_per_d") * 0.5 * (gen.m + gen.n));
  } else {
    fail(block_line, "T", "missing (set T or T_per_d)");
  }

  if (has("seed")) cfg.base_seed = static_cast<std::uint64_t>(get_int("seed"));
  if (has("replications")) cfg.replications = static_cast<int>(get_int("replications"));
  if (has("methods")) {
    cfg.methods.clear();
    std::istringstream ss(values.at("methods"));
    std::string name;
    while (ss >> name) {
      try {
        cfg.methods.push_back(method_from_string(name));
      } catch (const DomainError& e) {
        fail(entry("methods").line, "methods", e.what());
      }
    }
  }
  if (has("lambda_rule")) {
    const std::string& rule = values.at("lambda_rule");
    if (rule == "theorem") {
      cfg.lambda_rule = LambdaRule::kTheorem;
    } else if (rule == "practical") {
      cfg.lambda_rule = LambdaRule::kPractical;
    } else {
      fail(entry("lambda_rule").line, "lambda_rule",
           "expected 'theorem' or 'practical' (use 'lambda' for an explicit value)");
    }
  }
  if (has("lambda")) {
    if (has("lambda_rule")) fail(entry("lambda").line, "lambda", "conflicts with lambda_rule");
    cfg.lambda_rule = LambdaRule::kExplicit;
    cfg.explicit_lambda = get_double("lambda");
  }
  if (has("rank_tilde")) cfg.rank_tilde = static_cast<int>(get_int("rank_tilde"));
  if (has("beta_dec")) cfg.beta_dec = get_double("beta_dec");
  if (has("tol")) cfg.tau = get_double("tol");
  if (has("max_iters")) cfg.max_outer_iters = static_cast<int>(get_int("max_iters"));
  if (has("max_linesearch_iters")) {
    cfg.max_linesearch_iters = static_cast<int>(get_int("max_linesearch_iters"));
  }
  if (has("mle_grad_tol")) cfg.mle_options.grad_tol = get_double("mle_grad_tol");
  if (has("mle_max_iters")) cfg.mle_options.max_iters = static_cast<int>(get_int("mle_max_iters"));

  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ParseError("experiment block at line " + std::to_string(block_line) + ": " + e.what());
  }
  return cfg;
}

void expand(const Block& block, const std::vector<Entry>& defaults,
            std::vector<ExperimentConfig>& out) {
  std::vector<Entry> merged;
  for (const Entry& e : defaults) {
    const bool overridden = std::any_of(block.entries.begin(), block.entries.end(),
                                        [&](const Entry& b) { return b.key == e.key; });
    if (!overridden) merged.push_back(e);
  }
  merged.insert(merged.end(), block.entries.begin(), block.entries.end());

  // Odometer over list-valued keys; the last key varies fastest.
  std::vector<std::size_t> index(merged.size(), 0);
  while (true) {
    std::map<std::string, std::string> values;
    for (std::size_t k = 0; k < merged.size(); ++k) values[merged[k].key] = merged[k].values[index[k]];
    out.push_back(build(merged, values, block.line));

    std::size_t k = merged.size();
    while (k > 0) {
      --k;
      if (++index[k] < merged[k].values.size()) break;
      index[k] = 0;
      if (k == 0) return;
    }
    if (merged.empty()) return;
  }
}

}  // namespace

std::vector<ExperimentConfig> parse_sweep_config(std::istream& in) {
  std::vector<Entry> defaults;
  std::vector<Block> blocks;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[experiment]") {
        throw ParseError("line " + std::to_string(line_no) + ": unknown section '" + line +
                         "' (expected [experiment])");
      }
      blocks.push_back({line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    Entry e;
    e.key = trim(line.substr(0, eq));
    e.line = line_no;
    if (std::find(kKeys.begin(), kKeys.end(), e.key) == kKeys.end()) {
      fail(line_no, e.key, "unknown field");
    }
    std::stringstream ss(line.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(line_no, e.key, "empty value");
      e.values.push_back(item);
    }
    if (e.values.empty()) fail(line_no, e.key, "empty value");
    std::vector<Entry>& target = blocks.empty() ? defaults : blocks.back().entries;
    if (std::any_of(target.begin(), target.end(), [&](const Entry& x) { return x.key == e.key; })) {
      fail(line_no, e.key, "set twice in the same block");
    }
    target.push_back(std::move(e));
  }
  if (blocks.empty()) throw ParseError("sweep config has no [experiment] blocks");

  std::vector<ExperimentConfig> grid;
  for (const Block& b : blocks) expand(b, defaults, grid);
  return grid;
}

std::vector<ExperimentConfig> load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return parse_sweep_config(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace mmnl
