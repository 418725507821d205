#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mmnl/mle.hpp"
#include "mmnl/synthetic.hpp"
#include "../support/oracles.hpp"

using namespace mmnl;

namespace {

// Full-assortment data for one type with the given choice counts.
ChoiceDataset counts_data(const std::vector<int>& counts, int type = 0, int m = 1) {
  const int n = static_cast<int>(counts.size());
  std::vector<int> all(n);
  for (int j = 0; j < n; ++j) all[j] = j;
  ChoiceDataset data(m, n);
  for (int j = 0; j < n; ++j)
    for (int c = 0; c < counts[j]; ++c) data.add(type, j, all);
  return data;
}

// Centered -log(count / T).
Vector closed_form(const std::vector<int>& counts) {
  double total = 0;
  for (int c : counts) total += c;
  Vector theta(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) theta(j) = -std::log(counts[j] / total);
  return theta.array() - theta.mean();
}

}  // namespace

TEST_CASE("options validation") {
  RowFitOptions o;
  CHECK_NOTHROW(o.validate());
  o.grad_tol = 0;
  CHECK_THROWS_AS(o.validate(), DomainError);
  o = {};
  o.ridge = -1;
  CHECK_THROWS_AS(o.validate(), DomainError);
  o = {};
  o.max_iters = 0;
  CHECK_THROWS_AS(o.validate(), DomainError);
}

TEST_CASE("closed-form count oracle") {
  const auto two = fit_row_newton(counts_data({3, 1}), {});
  CHECK(two.report.converged);
  CHECK(std::abs(two.theta(0) + 0.5 * std::log(3.0)) <= 1e-6);
  CHECK(std::abs(two.theta(1) - 0.5 * std::log(3.0)) <= 1e-6);
  CHECK(std::abs(two.theta(1) - 0.549306) <= 1e-6);

  const auto three = fit_row_newton(counts_data({2, 1, 1}), {});
  const Vector expected = closed_form({2, 1, 1});
  CHECK((three.theta - expected).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(std::abs(three.theta(0) + 0.4621) <= 1e-4);
  CHECK(std::abs(three.theta(1) - 0.2310) <= 1e-4);

  for (const auto& counts : std::vector<std::vector<int>>{{5, 9, 2, 7}, {1, 1, 1, 40}, {13, 4}}) {
    const auto res = fit_row_newton(counts_data(counts), {});
    CHECK((res.theta - closed_form(counts)).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("singleton assortments leave theta at zero") {
  ChoiceDataset data(1, 3);
  data.add(0, 1, std::vector<int>{1});
  data.add(0, 2, std::vector<int>{2});
  const auto res = fit_row_newton(data, {});
  CHECK(res.theta.isZero(0.0));
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 0);
}

TEST_CASE("grid-search oracle on two items") {
  Matrix truth(1, 2);
  truth << -0.5, 0.5;
  GeneratorConfig c;
  c.m = 1;
  c.n = 2;
  c.rank = 1;
  c.num_obs = 200;
  c.assortment_size = 2;
  Rng rng(3);
  const auto data = sample_dataset(truth, c, rng);
  std::vector<oracle::Obs> obs;
  for (std::size_t t = 0; t < data.size(); ++t) {
    obs.push_back({0, data[t].chosen_item, {0, 1}});
  }

  double best = std::numeric_limits<double>::infinity();
  double best_gap = 0.0;
  for (int k = -50000; k <= 50000; ++k) {
    const double gap = k * 1e-4;
    Matrix theta(1, 2);
    theta << -gap / 2, gap / 2;
    const double value = oracle::nll(theta, obs);
    if (value < best) {
      best = value;
      best_gap = gap;
    }
  }
  const auto res = fit_mle(data);
  CHECK(std::abs(res.estimate(0, 0) + best_gap / 2) <= 2e-4);
  CHECK(std::abs(res.estimate(0, 1) - best_gap / 2) <= 2e-4);
}

TEST_CASE("fit_mle decomposes by type") {
  GeneratorConfig c;
  c.m = 4;
  c.n = 6;
  c.rank = 2;
  c.num_obs = 800;
  c.assortment_size = 3;
  Rng rng(5);
  const Matrix truth = generate_truth(c, rng);
  const auto data = sample_dataset(truth, c, rng);
  const auto res = fit_mle(data);
  REQUIRE(res.reports.size() == 4);
  for (int i = 0; i < 4; ++i) {
    const auto row = fit_row_newton(data.subset_of_type(i), {});
    CHECK(res.estimate.row(i).transpose() == row.theta);
    CHECK(res.reports[i].row == i);
  }

  // Regrouping the observations by type keeps every row's fit.
  ChoiceDataset grouped(4, 6);
  for (int i = 3; i >= 0; --i) {
    const auto part = data.subset_of_type(i);
    for (std::size_t t = 0; t < part.size(); ++t) grouped.add(part.observation(t));
  }
  CHECK(fit_mle(grouped).estimate == res.estimate);
  CHECK((res.estimate.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("empty rows are zero and single-type data matches the row fit") {
  auto data = counts_data({4, 2, 3}, 1, 3);
  const auto res = fit_mle(data);
  CHECK(res.estimate.row(0).isZero(0.0));
  CHECK(res.estimate.row(2).isZero(0.0));
  CHECK(res.reports[0].converged);
  CHECK(res.reports[0].iterations == 0);

  const auto single = counts_data({4, 2, 3});
  CHECK(fit_mle(single).estimate.row(0).transpose() == fit_row_newton(single, {}).theta);
}

TEST_CASE("unoffered items stay pinned before centering") {
  ChoiceDataset data(1, 5);
  data.add(0, 0, std::vector<int>{0, 1});
  data.add(0, 1, std::vector<int>{0, 1});
  data.add(0, 1, std::vector<int>{1, 2});
  data.add(0, 2, std::vector<int>{1, 2});
  data.add(0, 2, std::vector<int>{0, 2});
  const auto res = fit_row_newton(data, {});
  // Items 3 and 4 never appear, so both equal -mean(raw theta).
  CHECK(res.theta(3) == res.theta(4));
  CHECK(std::abs(res.theta.sum()) <= 1e-12);
}

TEST_CASE("objective does not increase") {
  std::mt19937 gen(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto obs = oracle::random_observations(gen, 1, 5, 40, 3);
    const auto data = oracle::to_dataset(1, 5, obs);
    const auto res = fit_row_newton(data, {});
    CHECK(row_objective(res.theta, data) <= row_objective(Vector::Zero(5), data));
  }
}

TEST_CASE("separated data is capped and flagged") {
  ChoiceDataset data(1, 2);
  for (int k = 0; k < 5; ++k) data.add(0, 0, std::vector<int>{0, 1});
  RowFitOptions opts;
  opts.max_iters = 30;
  const auto res = fit_row_newton(data, opts);
  CHECK(res.theta.allFinite());
  CHECK(res.theta(0) < res.theta(1));
  CHECK(res.report.iterations <= 30);
  CHECK_FALSE(res.report.converged);

  MleResult agg;
  agg.reports = {res.report};
  CHECK_FALSE(agg.all_converged());
}

TEST_CASE("summary lists one line per row") {
  const auto res = fit_mle(counts_data({3, 1}, 0, 2));
  std::istringstream in(res.summary());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    int row = -1, iters = -1;
    double grad = -1;
    std::string flag;
    fields >> row >> iters >> grad >> flag;
    CHECK(row == rows);
    CHECK(grad >= 0);
    CHECK((flag == "true" || flag == "false"));
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("mixed types are rejected by the row fit") {
  ChoiceDataset data(2, 2);
  data.add(0, 0, std::vector<int>{0, 1});
  data.add(1, 0, std::vector<int>{0, 1});
  CHECK_THROWS_AS(fit_row_newton(data, {}), DomainError);
  CHECK_THROWS_AS(fit_mle(ChoiceDataset(2, 2)), DomainError);
}

TEST_CASE("separation is detected from the comparison graph") {
  ChoiceDataset linked(1, 3);
  linked.add(0, 0, std::vector<int>{0, 1});
  linked.add(0, 1, std::vector<int>{1, 2});
  linked.add(0, 2, std::vector<int>{0, 2});
  const auto ok = fit_row_newton(linked, {});
  CHECK_FALSE(ok.report.separated);
  CHECK(ok.report.converged);

  // Item 2 is offered but never chosen over anything.
  ChoiceDataset split(1, 3);
  split.add(0, 0, std::vector<int>{0, 1});
  split.add(0, 1, std::vector<int>{0, 1});
  split.add(0, 0, std::vector<int>{0, 2});
  const auto bad = fit_row_newton(split, {});
  CHECK(bad.report.separated);
  CHECK_FALSE(bad.report.converged);
}

TEST_CASE("separation flag agrees with a partition search") {
  // Separated iff some split (A, B) has an item of A chosen over one of B but
  // never the reverse: pushing B's coordinates up then lowers the objective.
  std::mt19937 gen(71);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;
    const auto obs = oracle::random_observations(gen, 1, n, 1 + trial % 6, n);
    const auto data = oracle::to_dataset(1, n, obs);
    bool separated = false;
    for (int mask = 1; mask < (1 << n) - 1 && !separated; ++mask) {
      bool forward = false, backward = false;
      for (const auto& o : obs) {
        for (int k : o.s) {
          const bool chosen_in_a = mask >> o.j & 1;
          const bool other_in_a = mask >> k & 1;
          if (chosen_in_a && !other_in_a) forward = true;
          if (!chosen_in_a && other_in_a) backward = true;
        }
      }
      separated = forward && !backward;
    }
    CAPTURE(trial);
    CHECK(fit_row_newton(data, {}).report.separated == separated);
  }
}
