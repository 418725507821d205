#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mmnl/fgd.hpp"
#include "mmnl/harness.hpp"
#include "mmnl/likelihood.hpp"
#include "mmnl/linalg.hpp"
#include "mmnl/mle.hpp"
#include "mmnl/plot.hpp"
#include "mmnl/synthetic.hpp"
#include "mmnl/text_io.hpp"

namespace py = pybind11;
using namespace mmnl;

namespace {

ChoiceDataset make_dataset(int m, int n, const std::vector<ChoiceObservation>& obs) {
  ChoiceDataset data(m, n);
  for (const ChoiceObservation& o : obs) data.add(o);
  return data;
}

}  // namespace

PYBIND11_MODULE(_mmnl, m) {
  m.doc() = "Low-rank mixed multinomial logit estimation from assortment choices";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<ChoiceObservation>(m, "ChoiceObservation")
      .def(py::init([](int type_index, int chosen_item, std::vector<int> assortment) {
             return ChoiceObservation{type_index, chosen_item, std::move(assortment)};
           }),
           py::arg("type_index"), py::arg("chosen_item"), py::arg("assortment"))
      .def_readwrite("type_index", &ChoiceObservation::type_index)
      .def_readwrite("chosen_item", &ChoiceObservation::chosen_item)
      .def_readwrite("assortment", &ChoiceObservation::assortment)
      .def("__repr__", [](const ChoiceObservation& o) {
        std::ostringstream s;
        s << "ChoiceObservation(type_index=" << o.type_index << ", chosen_item=" << o.chosen_item
          << ", |assortment|=" << o.assortment.size() << ")";
        return s.str();
      });

  py::class_<ChoiceDataset>(m, "ChoiceDataset")
      .def(py::init<int, int>(), py::arg("m"), py::arg("n"))
      .def(py::init(&make_dataset), py::arg("m"), py::arg("n"), py::arg("observations"))
      .def_property_readonly("m", &ChoiceDataset::num_types)
      .def_property_readonly("n", &ChoiceDataset::num_items)
      .def("__len__", &ChoiceDataset::size)
      .def("__getitem__",
           [](const ChoiceDataset& d, std::size_t t) {
             if (t >= d.size()) throw py::index_error();
             return d.observation(t);
           })
      .def("add", py::overload_cast<const ChoiceObservation&>(&ChoiceDataset::add))
      .def("max_assortment_size", &ChoiceDataset::max_assortment_size)
      .def("to_text", [](const ChoiceDataset& d) {
        std::ostringstream s;
        write_dataset(s, d);
        return s.str();
      })
      .def_static("from_text", [](const std::string& text) {
        std::istringstream s(text);
        return read_dataset(s);
      });

  py::class_<FactorPair>(m, "FactorPair")
      .def(py::init([](Matrix u, Matrix v) { return FactorPair{std::move(u), std::move(v)}; }),
           py::arg("u"), py::arg("v"))
      .def_readwrite("u", &FactorPair::u)
      .def_readwrite("v", &FactorPair::v);

  py::class_<SvdResult>(m, "SvdResult")
      .def_readonly("left_vectors", &SvdResult::left_vectors)
      .def_readonly("singular_values", &SvdResult::singular_values)
      .def_readonly("right_vectors", &SvdResult::right_vectors);

  m.def("choice_prob",
        [](const Vector& row, const std::vector<int>& assortment, int item) {
          return choice_prob(std::span<const double>(row.data(), row.size()), assortment, item);
        },
        py::arg("theta_row"), py::arg("assortment"), py::arg("item"));
  m.def("neg_log_likelihood", &neg_log_likelihood, py::arg("theta"), py::arg("data"));
  m.def("nll_gradient", &nll_gradient, py::arg("theta"), py::arg("data"));
  m.def("factored_objective", &factored_objective, py::arg("factors"), py::arg("data"),
        py::arg("lam"));
  m.def("factored_gradients",
        [](const FactorPair& f, const ChoiceDataset& data, double lam) {
          FactorGradients g = factored_gradients(f, data, lam);
          return py::make_tuple(std::move(g.u), std::move(g.v));
        },
        py::arg("factors"), py::arg("data"), py::arg("lam"));
  m.def("row_center", &row_center, py::arg("matrix"));
  m.def("rmse", &rmse, py::arg("a"), py::arg("b"));
  m.def("svd_top_k", &svd_top_k, py::arg("matrix"), py::arg("k"));
  m.def("nuclear_norm", &nuclear_norm, py::arg("matrix"));

  py::class_<GeneratorConfig>(m, "GeneratorConfig")
      .def(py::init([](int m_, int n, int rank, long long T, int K, std::uint64_t seed) {
             GeneratorConfig c{m_, n, rank, T, K, seed};
             c.validate();
             return c;
           }),
           py::arg("m"), py::arg("n"), py::arg("rank"), py::arg("T"), py::arg("K"),
           py::arg("seed") = 0)
      .def_readwrite("m", &GeneratorConfig::m)
      .def_readwrite("n", &GeneratorConfig::n)
      .def_readwrite("rank", &GeneratorConfig::rank)
      .def_readwrite("T", &GeneratorConfig::num_obs)
      .def_readwrite("K", &GeneratorConfig::assortment_size)
      .def_readwrite("seed", &GeneratorConfig::seed);

  m.def("generate",
        [](const GeneratorConfig& c) {
          Rng rng(c.seed);
          ParamMatrix truth = generate_truth(c, rng);
          ChoiceDataset data = sample_dataset(truth, c, rng);
          return py::make_tuple(std::move(truth), std::move(data));
        },
        py::arg("config"),
        "Ground truth and dataset drawn from one generator seeded with config.seed.");

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init([](double lam, int rank_tilde, double beta_dec, double tau, int max_outer,
                       int max_ls) {
             SolverConfig c{lam, rank_tilde, beta_dec, tau, max_outer, max_ls};
             c.validate();
             return c;
           }),
           py::arg("lam"), py::arg("rank_tilde"), py::arg("beta_dec") = 0.8,
           py::arg("tau") = 1e-10, py::arg("max_outer_iters") = 10000,
           py::arg("max_linesearch_iters") = 100)
      .def_readwrite("lam", &SolverConfig::lambda)
      .def_readwrite("rank_tilde", &SolverConfig::rank_tilde)
      .def_readwrite("beta_dec", &SolverConfig::beta_dec)
      .def_readwrite("tau", &SolverConfig::tau)
      .def_readwrite("max_outer_iters", &SolverConfig::max_outer_iters)
      .def_readwrite("max_linesearch_iters", &SolverConfig::max_linesearch_iters);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("estimate", &FitResult::estimate)
      .def_readonly("factors", &FitResult::factors)
      .def_readonly("objective_trace", &FitResult::objective_trace)
      .def_readonly("outer_iters", &FitResult::outer_iters)
      .def_readonly("total_gradient_evals", &FitResult::total_gradient_evals)
      .def_readonly("objective_evals", &FitResult::objective_evals)
      .def_readonly("wall_time_seconds", &FitResult::wall_time_seconds)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("warnings", &FitResult::warnings);

  m.def("init_factors",
        [](const ChoiceDataset& data, double lam, int rank_tilde) {
          InitResult r = init_factors(data, lam, rank_tilde);
          return py::make_tuple(std::move(r.factors), r.gamma);
        },
        py::arg("data"), py::arg("lam"), py::arg("rank_tilde"));
  m.def("fit", &fit, py::arg("data"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<RowFitOptions>(m, "RowFitOptions")
      .def(py::init([](double grad_tol, double ridge, int max_iters) {
             RowFitOptions o{grad_tol, ridge, max_iters};
             o.validate();
             return o;
           }),
           py::arg("grad_tol") = 1e-8, py::arg("ridge") = 1e-8, py::arg("max_iters") = 100)
      .def_readwrite("grad_tol", &RowFitOptions::grad_tol)
      .def_readwrite("ridge", &RowFitOptions::ridge)
      .def_readwrite("max_iters", &RowFitOptions::max_iters);

  py::class_<RowFitReport>(m, "RowFitReport")
      .def_readonly("row", &RowFitReport::row)
      .def_readonly("iterations", &RowFitReport::iterations)
      .def_readonly("grad_norm", &RowFitReport::grad_norm)
      .def_readonly("converged", &RowFitReport::converged)
      .def_readonly("separated", &RowFitReport::separated);

  py::class_<MleResult>(m, "MleResult")
      .def_readonly("estimate", &MleResult::estimate)
      .def_readonly("reports", &MleResult::reports)
      .def("all_converged", &MleResult::all_converged)
      .def("summary", &MleResult::summary);

  m.def("fit_mle", &fit_mle, py::arg("data"), py::arg("opts") = RowFitOptions{},
        py::call_guard<py::gil_scoped_release>());

  m.def("lambda_theorem", &lambda_theorem, py::arg("K"), py::arg("d"), py::arg("m"), py::arg("n"),
        py::arg("T"));
  m.def("lambda_practical", &lambda_practical, py::arg("K"), py::arg("d"), py::arg("m"),
        py::arg("n"), py::arg("T"));

  py::class_<BoundInputs>(m, "BoundInputs")
      .def(py::init([](double alpha, double K, double d, double T, double r, double sigma_tail,
                       double m_, double n) {
             return BoundInputs{alpha, K, d, T, r, sigma_tail, m_, n};
           }),
           py::arg("alpha"), py::arg("K"), py::arg("d"), py::arg("T"), py::arg("r"),
           py::arg("sigma_tail"), py::arg("m"), py::arg("n"))
      .def_readwrite("alpha", &BoundInputs::alpha)
      .def_readwrite("K", &BoundInputs::K)
      .def_readwrite("d", &BoundInputs::d)
      .def_readwrite("T", &BoundInputs::T)
      .def_readwrite("r", &BoundInputs::r)
      .def_readwrite("sigma_tail", &BoundInputs::sigma_tail)
      .def_readwrite("m", &BoundInputs::m)
      .def_readwrite("n", &BoundInputs::n);
  m.def("bound_inputs_from_truth", &bound_inputs_from_truth, py::arg("truth"), py::arg("K"),
        py::arg("T"), py::arg("r"));
  m.def("theorem_bound", &theorem_bound, py::arg("inputs"));

  m.def("run_experiment",
        [](const GeneratorConfig& gen, const std::vector<std::string>& methods, int replications,
           std::uint64_t base_seed, const std::string& lambda_rule, std::optional<double> lam,
           std::optional<int> rank_tilde, int max_outer_iters) {
          ExperimentConfig cfg;
          cfg.max_outer_iters = max_outer_iters;
          cfg.generator = gen;
          cfg.methods.clear();
          for (const std::string& name : methods) cfg.methods.push_back(method_from_string(name));
          cfg.replications = replications;
          cfg.base_seed = base_seed;
          cfg.rank_tilde = rank_tilde;
          if (lam) {
            cfg.lambda_rule = LambdaRule::kExplicit;
            cfg.explicit_lambda = *lam;
          } else if (lambda_rule == "theorem") {
            cfg.lambda_rule = LambdaRule::kTheorem;
          } else if (lambda_rule == "practical") {
            cfg.lambda_rule = LambdaRule::kPractical;
          } else {
            throw DomainError("lambda_rule must be theorem or practical");
          }
          py::list rows;
          std::vector<ExperimentRecord> records;
          {
            py::gil_scoped_release release;
            records = run_experiment(cfg);
          }
          for (const ExperimentRecord& r : records) {
            py::dict row;
            row["m"] = r.m;
            row["n"] = r.n;
            row["r"] = r.r;
            row["T"] = r.T;
            row["K"] = r.K;
            row["method"] = to_string(r.method);
            row["lambda"] = r.lambda;
            row["seed"] = r.seed;
            row["rmse"] = r.rmse;
            row["frob_error"] = r.frob_error;
            row["theorem_bound"] = r.theorem_bound;
            row["outer_iters"] = r.outer_iters;
            row["wall_time_seconds"] = r.wall_time_seconds;
            row["converged"] = r.converged;
            rows.append(row);
          }
          return rows;
        },
        py::arg("generator"), py::arg("methods") = std::vector<std::string>{"fgd", "mle", "zero"},
        py::arg("replications") = 1, py::arg("base_seed") = 0,
        py::arg("lambda_rule") = "practical", py::arg("lam") = py::none(),
        py::arg("rank_tilde") = py::none(), py::arg("max_outer_iters") = 10000,
        "One dict per (replication, method) with the results-CSV fields.");

  m.def("emit_plot",
        [](const std::string& csv_text, const std::string& x_axis, const std::string& title) {
          std::istringstream in(csv_text);
          return emit_plot(in, PlotSpec{plot_axis_from_string(x_axis), title});
        },
        py::arg("csv_text"), py::arg("x_axis") = "size", py::arg("title") = "");

  m.def("matrix_to_text", [](const Matrix& mat) {
    std::ostringstream s;
    write_matrix(s, mat);
    return s.str();
  });
  m.def("matrix_from_text", [](const std::string& text) {
    std::istringstream s(text);
    return read_matrix(s);
  });
  m.attr("RESULTS_HEADER") = kResultsHeader;
}
