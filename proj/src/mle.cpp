#include "mmnl/mle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmnl/text_io.hpp"

namespace mmnl {
namespace {

struct RowModel {
  double value = 0.0;
  Vector grad;
  Eigen::MatrixXd hessian;
};

// Objective, gradient and (optionally) Hessian of the per-row MNL
// likelihood. Per observation the gradient is e_{j_t} - p_t and the Hessian
// diag(p_t) - p_t p_t^T, both restricted to the assortment.
RowModel evaluate(const Vector& theta, const ChoiceDataset& rows, bool with_hessian) {
  const Eigen::Index n = theta.size();
  RowModel out;
  out.grad = Vector::Zero(n);
  if (with_hessian) out.hessian = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> probs;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const ObservationView obs = rows[t];
    double lo = theta(obs.assortment[0]);
    for (const int j : obs.assortment) lo = std::min(lo, theta(j));
    probs.resize(obs.assortment.size());
    double total = 0.0;
    for (std::size_t k = 0; k < obs.assortment.size(); ++k) {
      probs[k] = std::exp(lo - theta(obs.assortment[k]));
      total += probs[k];
    }
    for (double& p : probs) p /= total;
    out.value += (theta(obs.chosen_item) - lo) + std::log(total);

    out.grad(obs.chosen_item) += 1.0;
    for (std::size_t k = 0; k < obs.assortment.size(); ++k) {
      const int j = obs.assortment[k];
      out.grad(j) -= probs[k];
      if (!with_hessian) continue;
      out.hessian(j, j) += probs[k];
      for (std::size_t q = 0; q < obs.assortment.size(); ++q) {
        out.hessian(j, obs.assortment[q]) -= probs[k] * probs[q];
      }
    }
  }
  const double inv_t = 1.0 / static_cast<double>(rows.size());
  out.value *= inv_t;
  out.grad *= inv_t;
  if (with_hessian) out.hessian *= inv_t;
  return out;
}

void check_single_type(const ChoiceDataset& rows) {
  if (rows.empty()) throw DomainError("fit_row_newton needs at least one observation");
  const int type = rows[0].type_index;
  for (std::size_t t = 1; t < rows.size(); ++t) {
    if (rows[t].type_index != type) {
      throw DomainError("fit_row_newton: observations span more than one type");
    }
  }
}

// The likelihood has a finite minimizer exactly when the "chosen while
// offered alongside" graph on the offered items is strongly connected.
// The likelihood has a finite minimizer exactly when every "a chosen while b
// was offered" edge lies on a cycle, i.e. both ends share a strongly
// connected component. Components are found with Kosaraju's two passes.
bool has_finite_optimum(const ChoiceDataset& rows) {
  const int n = rows.num_items();
  const auto at = [n](int a, int b) { return static_cast<std::size_t>(a) * n + b; };
  std::vector<char> beats(static_cast<std::size_t>(n) * n, 0);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const ObservationView obs = rows[t];
    for (const int j : obs.assortment) {
      if (j != obs.chosen_item) beats[at(obs.chosen_item, j)] = 1;
    }
  }

  std::vector<int> order;
  std::vector<char> seen(n, 0);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    // Iterative DFS recording finish order; next[v] is v's next neighbour to try.
    std::vector<std::pair<int, int>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      while (next < n && !(beats[at(v, next)] && !seen[next])) ++next;
      if (next == n) {
        order.push_back(v);
        stack.pop_back();
      } else {
        seen[next] = 1;
        stack.push_back({next, 0});
      }
    }
  }

  std::vector<int> component(n, -1);
  int label = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (component[*it] >= 0) continue;
    std::vector<int> stack{*it};
    component[*it] = label;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u = 0; u < n; ++u) {
        if (beats[at(u, v)] && component[u] < 0) {
          component[u] = label;
          stack.push_back(u);
        }
      }
    }
    ++label;
  }

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (beats[at(a, b)] && component[a] != component[b]) return false;
    }
  }
  return true;
}

}  // namespace

void RowFitOptions::validate() const {
  if (!(grad_tol > 0.0)) throw DomainError("grad_tol must be positive");
  if (!(ridge >= 0.0)) throw DomainError("ridge must be nonnegative");
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
}

double row_objective(const Vector& theta, const ChoiceDataset& row_observations) {
  check_single_type(row_observations);
  return evaluate(theta, row_observations, false).value;
}

RowFit fit_row_newton(const ChoiceDataset& rows, const RowFitOptions& opts) {
  opts.validate();
  check_single_type(rows);
  const Eigen::Index n = rows.num_items();

  RowFit out;
  out.report.row = rows[0].type_index;
  Vector theta = Vector::Zero(n);
  RowModel model = evaluate(theta, rows, true);

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  const Eigen::MatrixXd ridge = opts.ridge * Eigen::MatrixXd::Identity(n, n);

  while (true) {
    out.report.grad_norm = model.grad.norm();
    if (out.report.grad_norm <= opts.grad_tol) {
      out.report.converged = true;
      break;
    }
    if (out.report.iterations >= opts.max_iters) break;

    const Eigen::MatrixXd system = model.hessian + ridge;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    Vector step = ldlt.solve(-model.grad);
    const Vector residual = system * step + model.grad;
    if (residual.norm() > 1e-10 * out.report.grad_norm) step -= ldlt.solve(residual);

    const double slope = model.grad.dot(step);
    if (!(slope < 0.0)) break;  // not a descent direction; nothing more to gain

    double alpha = 1.0;
    bool moved = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      const Vector candidate = theta + alpha * step;
      const double value = evaluate(candidate, rows, false).value;
      if (std::isfinite(value) && value <= model.value + kArmijo * alpha * slope) {
        theta = candidate;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
    ++out.report.iterations;
    model = evaluate(theta, rows, true);
  }

  // Under separation the gradient still fades as coordinates run off, so a
  // small gradient alone does not certify a fit.
  out.report.separated = !has_finite_optimum(rows);
  if (out.report.separated) out.report.converged = false;
  out.theta = theta.array() - theta.mean();
  return out;
}

bool MleResult::all_converged() const {
  return std::all_of(reports.begin(), reports.end(),
                     [](const RowFitReport& r) { return r.converged; });
}

std::string MleResult::summary() const {
  std::ostringstream out;
  for (const RowFitReport& r : reports) {
    out << r.row << ' ' << r.iterations << ' ' << format_double(r.grad_norm) << ' '
        << (r.converged ? "true" : "false") << '\n';
  }
  return out.str();
}

MleResult fit_mle(const ChoiceDataset& data, const RowFitOptions& opts) {
  opts.validate();
  if (data.empty()) throw DomainError("fit_mle: dataset has no observations");
  const int m = data.num_types();
  const int n = data.num_items();

  std::vector<ChoiceDataset> per_type(static_cast<std::size_t>(m), ChoiceDataset(m, n));
  for (std::size_t t = 0; t < data.size(); ++t) {
    const ObservationView obs = data[t];
    per_type[obs.type_index].add(obs.type_index, obs.chosen_item, obs.assortment);
  }

  MleResult out;
  out.estimate = ParamMatrix::Zero(m, n);
  out.reports.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    if (per_type[i].empty()) {
      out.reports.push_back({i, 0, 0.0, true, false});
      continue;
    }
    RowFit row = fit_row_newton(per_type[i], opts);
    out.estimate.row(i) = row.theta.transpose();
    out.reports.push_back(row.report);
  }
  return out;
}

}  // namespace mmnl
