#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bcev/cli.hpp"
#include "bcev/eprocess.hpp"
#include "bcev/evalues.hpp"
#include "bcev/exchangeable.hpp"
#include "bcev/experiments.hpp"
#include "bcev/kernels.hpp"
#include "bcev/model.hpp"
#include "bcev/oracles.hpp"

namespace py = pybind11;
using namespace bcev;

namespace {

StateVector to_state(const std::vector<double>& x) { return StateVector(x); }

std::vector<StateVector> to_states(const std::vector<std::vector<double>>& rows) {
  std::vector<StateVector> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r);
  return out;
}

py::dict evalue_dict(const EValueResult& e) {
  py::dict d;
  d["log_e"] = e.log_e;
  d["e"] = e.e();
  d["M"] = e.M;
  d["S"] = e.S;
  d["statistic_id"] = e.statistic_id;
  d["components"] = e.components;
  return d;
}

py::dict table_dict(const io::Table& t) {
  py::dict d;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    std::vector<double> col;
    col.reserve(t.rows.size());
    for (const auto& row : t.rows) col.push_back(row[c]);
    d[py::str(t.columns[c])] = col;
  }
  return d;
}

/// Stateful e-process wrapper; each step draws from seed-rooted streams.
class PyEProcess {
 public:
  PyEProcess(const std::string& strategy, double lambda, std::uint64_t seed, unsigned threads)
      : strategy_(strategy == "grapa" ? BettingStrategy::grapa(lambda) : BettingStrategy::fixed(lambda)),
        rng_(seed),
        threads_(threads) {
    if (strategy != "grapa" && strategy != "fixed") throw ConfigError("strategy must be fixed or grapa");
  }

  double step(const std::vector<double>& x, const TestStatistic& stat, const ReversibleKernel& kernel,
              std::size_t J, std::size_t M, std::size_t S) {
    state_ = bcev::step(state_, to_state(x), stat, kernel, FanConfig{J, M, S}, strategy_, rng_, threads_);
    return state_.log_wealth;
  }
  double bet(double log_u) {
    state_ = bcev::bet(state_, log_u, strategy_);
    return state_.log_wealth;
  }
  void skip() { state_ = bcev::skip(state_); }
  const EProcessState& state() const { return state_; }

 private:
  BettingStrategy strategy_;
  RngStream rng_;
  unsigned threads_;
  EProcessState state_;
};

}  // namespace

PYBIND11_MODULE(_bcev, m) {
  m.doc() = "Besag-Clifford e-values and e-processes";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<LogModel, std::shared_ptr<LogModel>>(m, "Model")
      .def_property_readonly("id", &LogModel::id)
      .def_property_readonly("dimension", &LogModel::dimension)
      .def("log_density", [](const LogModel& model, const std::vector<double>& x) {
        return model.log_density(std::span<const double>(x));
      })
      .def("sample", [](const LogModel& model, std::uint64_t seed) {
        Rng rng = RngStream(seed).engine();
        return model.sample(rng).vector();
      });

  auto as_model = [](ModelPtr p) { return std::const_pointer_cast<LogModel>(p); };
  auto as_const = [](const std::shared_ptr<LogModel>& p) { return ModelPtr(p); };

  m.def("gaussian_model", [=](double mean, double variance, std::size_t n) {
    return as_model(gaussian_model(mean, variance, n));
  }, py::arg("mean"), py::arg("variance"), py::arg("n"));
  m.def("poisson_model", [=](double rate, std::size_t n) { return as_model(poisson_model(rate, n)); },
        py::arg("rate"), py::arg("n"));
  m.def("poe_model",
        [=](const std::vector<std::tuple<double, double, double>>& experts, std::size_t n) {
          std::vector<Expert> e;
          for (const auto& [c, s, d] : experts) e.push_back({c, s, d});
          return as_model(poe_student_t_model(e, n));
        },
        py::arg("experts"), py::arg("n"), "experts: (center, scale, dof) triples");

  py::class_<TestStatistic>(m, "Statistic")
      .def_property_readonly("id", &TestStatistic::id)
      .def("log_t", [](const TestStatistic& s, const std::vector<double>& x) {
        return s.log_t(std::span<const double>(x));
      });
  m.def("ulr_statistic", [=](const std::shared_ptr<LogModel>& q, const std::shared_ptr<LogModel>& p) {
    return ulr_statistic(as_const(q), as_const(p));
  });
  m.def("power_ulr_statistic",
        [=](const std::shared_ptr<LogModel>& q, const std::shared_ptr<LogModel>& p, double eta) {
          return power_ulr_statistic(as_const(q), as_const(p), eta);
        });
  m.def("plug_in_gaussian_statistic",
        [](const std::vector<std::vector<double>>& history) { return plug_in_gaussian_statistic(to_states(history)); });
  m.def("predictable_plug_in_gaussian_statistic", [](const std::vector<std::vector<double>>& history) {
    return predictable_plug_in_gaussian_statistic(to_states(history));
  });
  m.def("gaussian_mean_mle_statistic", &gaussian_mean_mle_statistic, py::arg("theta"), py::arg("variance"));

  py::class_<ReversibleKernel>(m, "Kernel")
      .def_property_readonly("id", &ReversibleKernel::id)
      .def_property_readonly("dimension", &ReversibleKernel::dimension)
      .def("run_steps", [](const ReversibleKernel& k, const std::vector<double>& start, std::size_t J,
                           std::uint64_t seed) { return run_steps(k, to_state(start), J, RngStream(seed)).vector(); });
  m.def("ar1_kernel", &ar1_kernel, py::arg("phi"), py::arg("n"), py::arg("mean") = 0.0, py::arg("variance") = 1.0);
  m.def("rwm_kernel", [=](const std::shared_ptr<LogModel>& t, double sd) { return rwm_kernel(as_const(t), sd); },
        py::arg("target"), py::arg("proposal_sd") = kDefaultProposalSd);
  m.def("mala_kernel", [=](const std::shared_ptr<LogModel>& t, double step) { return mala_kernel(as_const(t), step); },
        py::arg("target"), py::arg("step_size"));
  m.def("exact_kernel", [=](const std::shared_ptr<LogModel>& t) { return exact_kernel(as_const(t)); });

  m.def("fan_statistics",
        [](const ReversibleKernel& k, const TestStatistic& stat, const std::vector<double>& x, std::size_t J,
           std::size_t M, std::size_t S, std::uint64_t seed, unsigned threads) {
          py::list out;
          for (const auto& c : multi_fan_statistics(k, stat, to_state(x), J, M, S, RngStream(seed), threads)) {
            out.append(py::make_tuple(c.log_tx, c.log_ty, c.anchor.vector()));
          }
          return out;
        },
        py::arg("kernel"), py::arg("statistic"), py::arg("x"), py::arg("J"), py::arg("M"), py::arg("S") = 1,
        py::arg("seed") = experiments::kDefaultSeed, py::arg("threads") = 1,
        "Per chain: (log T(x), [log T(y_m)], anchor).");
  m.def("evalue",
        [](const ReversibleKernel& k, const TestStatistic& stat, const std::vector<double>& x, std::size_t J,
           std::size_t M, std::size_t S, std::uint64_t seed, unsigned threads) {
          const auto chains = multi_fan_statistics(k, stat, to_state(x), J, M, S, RngStream(seed), threads);
          return evalue_dict(bc_evalue_multichain(stat.id(), chains));
        },
        py::arg("kernel"), py::arg("statistic"), py::arg("x"), py::arg("J"), py::arg("M"), py::arg("S") = 1,
        py::arg("seed") = experiments::kDefaultSeed, py::arg("threads") = 1);
  m.def("confidence_region",
        [](const std::vector<double>& grid, const std::function<py::tuple(double)>& builder,
           const std::vector<double>& x, std::size_t J, std::size_t M, double alpha, std::uint64_t seed,
           std::size_t S) {
          const RegionBuilder b = [&](double theta) {
            py::gil_scoped_acquire gil;
            const py::tuple t = builder(theta);
            return std::make_pair(t[0].cast<TestStatistic>(), t[1].cast<ReversibleKernel>());
          };
          const auto region = confidence_region(grid, b, to_state(x), J, M, alpha, RngStream(seed), 1, S);
          py::list out;
          for (const auto& mem : region.members) out.append(py::make_tuple(mem.theta, mem.evalue.log_e, mem.in_region));
          return out;
        },
        py::arg("grid"), py::arg("builder"), py::arg("x"), py::arg("J"), py::arg("M"), py::arg("alpha"),
        py::arg("seed") = experiments::kDefaultSeed, py::arg("S") = 1,
        "builder(theta) -> (Statistic, Kernel). Returns (theta, log_e, in_region) rows.");

  using Vec = std::vector<double>;
  m.def("log_bc_evalue", [](double log_tx, const Vec& log_ty) { return log_bc_evalue(log_tx, log_ty); },
        py::arg("log_tx"), py::arg("log_ty"));
  m.def("gof_pvalue", [](double log_tx, const Vec& log_ty) { return gof_pvalue(log_tx, log_ty); },
        py::arg("log_tx"), py::arg("log_ty"));
  m.def("log_sum_exp", [](const Vec& v) { return log_sum_exp(std::span<const double>(v)); });
  m.def("log_mean_exp", [](const Vec& v) { return log_mean_exp(v); });
  m.def("composite_null_log_evalue", [](const Vec& per_null) {
    std::vector<EValueResult> r(per_null.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i].log_e = per_null[i];
    return composite_null_evalue(r).log_e;
  });

  m.def("grapa_lambda", [](const Vec& u, double lambda0) { return grapa_lambda(u, lambda0); },
        py::arg("u_history"), py::arg("lambda0") = kDefaultGrapaInitialLambda);
  m.def("grapa_objective", [](const Vec& u, double lambda) { return grapa_objective(u, lambda); },
        py::arg("u_history"), py::arg("lam"));
  m.def("stopping_time", [](const Vec& trace, double alpha) { return stopping_time(trace, alpha); },
        py::arg("log_wealth_trace"), py::arg("alpha"));

  py::class_<PyEProcess>(m, "EProcess")
      .def(py::init<const std::string&, double, std::uint64_t, unsigned>(), py::arg("strategy") = "grapa",
           py::arg("lam") = kDefaultGrapaInitialLambda, py::arg("seed") = experiments::kDefaultSeed,
           py::arg("threads") = 1)
      .def("step", &PyEProcess::step, py::arg("x"), py::arg("statistic"), py::arg("kernel"), py::arg("J") = 1,
           py::arg("M") = 100, py::arg("S") = 1)
      .def("bet", &PyEProcess::bet)
      .def("skip", &PyEProcess::skip)
      .def_property_readonly("t", [](const PyEProcess& p) { return p.state().t; })
      .def_property_readonly("log_wealth", [](const PyEProcess& p) { return p.state().log_wealth; })
      .def_property_readonly("log_wealth_trace", [](const PyEProcess& p) { return p.state().log_wealth_trace; })
      .def_property_readonly("log_u_history", [](const PyEProcess& p) { return p.state().log_u_history; })
      .def_property_readonly("lambda_history", [](const PyEProcess& p) { return p.state().lambda_history; });

  auto orc = m.def_submodule("oracles", "AR(1) closed forms");
  orc.def("lr_mean_shift", &oracles::lr_mean_shift);
  orc.def("delta_j_mean_shift", &oracles::delta_j_mean_shift);
  orc.def("epower_delta_mean_shift", &oracles::epower_delta_mean_shift);
  orc.def("lr_rescale", &oracles::lr_rescale);
  orc.def("delta_j_rescale", &oracles::delta_j_rescale);
  orc.def("delta1_rescale", &oracles::delta1_rescale);
  orc.def("kl_mixing_mean_shift", &oracles::kl_mixing_mean_shift);
  orc.def("kl_mixing_rescale", &oracles::kl_mixing_rescale);

  m.def("experiment_names", &experiments::names);
  m.def("run_experiment",
        [](const std::string& name, const std::map<std::string, std::string>& overrides, std::uint64_t seed,
           unsigned threads, bool paper_scale) {
          io::KeyValueConfig cfg;
          for (const auto& [k, v] : overrides) cfg.set("experiment." + k, v);
          io::Table table;
          {
            py::gil_scoped_release release;
            table = experiments::run(name, cfg, {seed, threads}, paper_scale);
          }
          return table_dict(table);
        },
        py::arg("name"), py::arg("overrides") = std::map<std::string, std::string>{},
        py::arg("seed") = experiments::kDefaultSeed, py::arg("threads") = 1, py::arg("paper_scale") = false,
        "Returns {column: [values]}. Override values are strings as in the [experiment] config section.");

  m.def("run_cli",
        [](const std::vector<std::string>& args, const std::string& stdin_text) {
          std::istringstream in(stdin_text);
          std::ostringstream out, err;
          const int code = cli::run(args, in, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), py::arg("stdin") = "", "Returns (exit_code, stdout, stderr).");
}
