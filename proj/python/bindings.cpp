#include <optional>
#include <sstream>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iterreg/commands.hpp"
#include "iterreg/config.hpp"
#include "iterreg/engine.hpp"
#include "iterreg/errors.hpp"
#include "iterreg/evaluation.hpp"
#include "iterreg/stopping.hpp"
#include "iterreg/synth.hpp"

namespace py = pybind11;
using namespace iterreg;

// Structured arguments cross the boundary as JSON text; the Python package
// wraps them in dicts.
namespace {

Kernel kernel_arg(const std::string& spec) { return kernel_from_json(Json::parse(spec)); }
Loss loss_arg(const std::string& spec) { return loss_from_json(Json::parse(spec)); }

StepMode mode_arg(const std::string& mode) {
  if (mode == "nonsmooth") return StepMode::nonsmooth;
  if (mode == "smooth") return StepMode::smooth;
  throw DomainError("mode must be \"nonsmooth\" or \"smooth\"");
}

IterateKind iterate_arg(const std::string& kind) {
  if (kind == "last") return IterateKind::last;
  if (kind == "averaged") return IterateKind::averaged;
  if (kind == "best") return IterateKind::best;
  throw DomainError("iterate must be \"last\", \"averaged\" or \"best\"");
}

py::dict indices_dict(const RateIndices& r) {
  py::dict d;
  d["gamma"] = r.gamma;
  d["alpha"] = r.alpha;
  d["has_log_factor"] = r.has_log_factor;
  return d;
}

py::dict run_dict(const RunResult& r) {
  const std::size_t n = r.records.size();
  Eigen::VectorXi t(static_cast<Eigen::Index>(n));
  Vector eta(t.size()), risk(t.size()), norm(t.size()), sub(t.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    t(k) = static_cast<int>(r.records[i].t);
    eta(k) = r.records[i].eta;
    risk(k) = r.records[i].empirical_risk;
    norm(k) = r.records[i].rkhs_norm;
    sub(k) = r.records[i].subgrad_norm;
  }
  py::dict d;
  d["t"] = t;
  d["eta"] = eta;
  d["empirical_risk"] = risk;
  d["rkhs_norm"] = norm;
  d["subgrad_norm"] = sub;
  d["last"] = last_iterate(r.state);
  d["averaged"] = averaged_iterate(r.state);
  d["best"] = best_iterate(r.state);
  d["best_t"] = r.state.best_t;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kernel regularization by early-stopped subgradient iteration";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InadmissibleSchedule>(m, "InadmissibleSchedule", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("gram", [](const std::string& kernel, const Matrix& X) { return gram(kernel_arg(kernel), X).entries; },
        py::arg("kernel"), py::arg("X"));
  m.def("cross_gram",
        [](const std::string& kernel, const Matrix& A, const Matrix& B) { return cross_gram(kernel_arg(kernel), A, B); },
        py::arg("kernel"), py::arg("A"), py::arg("B"));
  m.def("predict",
        [](const std::string& kernel, const Matrix& centers, const Vector& coeffs, const Matrix& X) {
          return KernelExpansion(kernel_arg(kernel), centers, coeffs).predict(X);
        },
        py::arg("kernel"), py::arg("centers"), py::arg("coeffs"), py::arg("X"));

  m.def("loss_values",
        [](const std::string& spec, const Vector& y, const Vector& a) {
          const Loss loss = loss_arg(spec);
          if (y.size() != a.size()) throw DimensionError("labels and predictions differ in length");
          Vector v(y.size());
          for (Eigen::Index i = 0; i < y.size(); ++i) v(i) = loss.value(y(i), a(i));
          return v;
        },
        py::arg("loss"), py::arg("y"), py::arg("a"));
  m.def("loss_left_derivatives",
        [](const std::string& spec, const Vector& y, const Vector& a) {
          const Loss loss = loss_arg(spec);
          if (y.size() != a.size()) throw DimensionError("labels and predictions differ in length");
          Vector v(y.size());
          for (Eigen::Index i = 0; i < y.size(); ++i) v(i) = loss.left_derivative(y(i), a(i));
          return v;
        },
        py::arg("loss"), py::arg("y"), py::arg("a"));
  m.def("growth_params",
        [](const std::string& spec) {
          const GrowthParams g = loss_arg(spec).growth_params();
          py::dict d;
          d["q"] = g.q;
          d["c_q"] = g.c_q;
          d["v0"] = g.v0;
          d["lipschitz"] = g.lipschitz ? py::cast(*g.lipschitz) : py::none();
          return d;
        },
        py::arg("loss"));

  m.def("max_eta1",
        [](const std::string& loss, double kappa, double theta, const std::string& mode) {
          return max_eta1(loss_arg(loss), kappa, theta, mode_arg(mode));
        },
        py::arg("loss"), py::arg("kappa"), py::arg("theta"), py::arg("mode") = "nonsmooth");

  m.def("run",
        [](const std::string& kernel, const Matrix& X, const Vector& y, const std::string& loss_spec, double theta,
           std::int64_t T, std::optional<double> eta1, const std::string& mode, bool force, bool incremental) {
          const Kernel k = kernel_arg(kernel);
          const Loss loss = loss_arg(loss_spec);
          const MatrixRef points(X);
          const KappaBound kb = kappa(k, &points);
          const StepSchedule sched = make_schedule(loss, kb.value, theta, eta1, mode_arg(mode), force);
          RunOptions opts;
          opts.incremental = incremental;
          RunResult r;
          {
            py::gil_scoped_release release;
            r = run(k, Sample{X, y}, loss, sched, T, opts);
          }
          py::dict d = run_dict(r);
          d["eta1"] = sched.eta1;
          d["admissible"] = sched.admissible;
          return d;
        },
        py::arg("kernel"), py::arg("X"), py::arg("y"), py::arg("loss"), py::arg("theta"), py::arg("T"),
        py::arg("eta1") = py::none(), py::arg("mode") = "nonsmooth", py::arg("force") = false,
        py::arg("incremental") = false);

  m.def("compute_indices",
        [](double q, double tau, double beta, double theta, double zeta, bool smooth, const std::string& iterate) {
          RegimeParams p{q, tau, beta, zeta, theta, smooth};
          return indices_dict(compute_indices(p, iterate_arg(iterate)));
        },
        py::arg("q"), py::arg("tau"), py::arg("beta"), py::arg("theta"), py::arg("zeta") = kZetaCapacityIndependent,
        py::arg("smooth") = false, py::arg("iterate") = "last");
  m.def("hinge_indices", [](double beta, double theta) { return indices_dict(hinge_indices(beta, theta)); },
        py::arg("beta"), py::arg("theta"));
  m.def("hinge_fixed_T_schedule",
        [](double beta, double eps) {
          const FixedTSchedule s = hinge_fixed_T_schedule(beta, eps);
          return py::make_tuple(s.theta, s.gamma);
        },
        py::arg("beta"), py::arg("eps"));
  m.def("theoretical_T", &theoretical_T, py::arg("m"), py::arg("gamma"));
  m.def("lambda_T", &lambda_T, py::arg("T"), py::arg("q"), py::arg("theta"));
  m.attr("ZETA_CAPACITY_INDEPENDENT") = kZetaCapacityIndependent;

  m.def("sample",
        [](const std::string& dist, Eigen::Index n, std::uint64_t seed) {
          const Sample s = sample(dist_from_json(Json::parse(dist)), n, seed);
          return py::make_tuple(s.X, s.y);
        },
        py::arg("dist"), py::arg("m"), py::arg("seed"));

  m.def("train",
        [](const std::string& config) {
          const RunConfig cfg = parse_config(Json::parse(config));
          std::optional<TrainOutcome> out;
          {
            py::gil_scoped_release release;
            out.emplace(train(cfg, load_data(cfg)));
          }
          const TrainOutcome& o = *out;
          std::ostringstream csv;
          write_path_csv(csv, o);
          return py::make_tuple(dump_json(model_to_json(o)), csv.str(), o.t_star);
        },
        py::arg("config"));
}
