#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "markovsa/harness.hpp"
#include "markovsa/icg.hpp"
#include "markovsa/metrics.hpp"
#include "markovsa/solver.hpp"
#include "markovsa/version.hpp"

namespace py = pybind11;
using namespace markovsa;

namespace {

Point point_from_array(const py::array_t<double, py::array::c_style |
                                                      py::array::forcecast>& a) {
  if (a.ndim() == 1) {
    Point p = Point::zeros(a.shape(0));
    std::copy(a.data(), a.data() + a.shape(0), p.values.data());
    return p;
  }
  if (a.ndim() == 2) {
    Point p = Point::zeros(a.shape(0), a.shape(1));
    std::copy(a.data(), a.data() + a.size(), p.values.data());
    return p;
  }
  throw std::invalid_argument("expected a 1-d or 2-d array");
}

py::array_t<double> array_from_point(const Point& p) {
  if (p.shape) {
    py::array_t<double> out({p.shape->rows, p.shape->cols});
    std::copy(p.values.data(), p.values.data() + p.size(),
              out.mutable_data());
    return out;
  }
  py::array_t<double> out(p.size());
  std::copy(p.values.data(), p.values.data() + p.size(), out.mutable_data());
  return out;
}

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// owns an oracle built from the `environment` section of an experiment
// config document
class PyOracle {
 public:
  explicit PyOracle(const std::string& env_json) {
    nlohmann::json env = nlohmann::json::parse(env_json);
    oracle_ = make_oracle_from_json(env);
  }

  void reset(std::uint64_t seed) { oracle_->reset(seed); }

  py::tuple step(const Array& theta) {
    const Sample s = oracle_->step(point_from_array(theta));
    return py::make_tuple(array_from_point(s.x),
                          s.has_y ? py::cast(s.y) : py::none());
  }

  py::array_t<double> stoch_grad(const Array& theta, const Array& x,
                                 py::object y) {
    Sample s;
    s.x = point_from_array(x);
    if (!y.is_none()) {
      s.y = y.cast<double>();
      s.has_y = true;
    }
    return array_from_point(oracle_->stoch_grad(point_from_array(theta), s));
  }

  double loss(const Array& theta, const Array& x, py::object y) {
    Sample s;
    s.x = point_from_array(x);
    if (!y.is_none()) {
      s.y = y.cast<double>();
      s.has_y = true;
    }
    return oracle_->loss(point_from_array(theta), s);
  }

  Eigen::Index theta_dim() const { return oracle_->theta_dim(); }
  long step_count() const { return oracle_->step_count(); }

  py::array_t<double> mean_gradient(const Array& theta, int burn_in, int n,
                                    std::uint64_t seed) {
    return array_from_point(estimate_mean_gradient(
        *oracle_, point_from_array(theta), burn_in, n, seed));
  }

 private:
  std::unique_ptr<StreamOracle> oracle_;
};

std::string run_experiment_json(const std::string& config_json) {
  const auto cfg =
      parse_experiment_config(nlohmann::json::parse(config_json));
  return run_experiment(cfg).to_json().dump(2);
}

std::string sweep_json(const std::string& config_json,
                       const std::vector<int>& grid) {
  const auto cfg =
      parse_experiment_config(nlohmann::json::parse(config_json));
  return sweep(cfg, grid).to_json().dump(2);
}

py::dict run_single_json(const std::string& config_json, int repetition) {
  const auto cfg =
      parse_experiment_config(nlohmann::json::parse(config_json));
  const auto set = cfg.make_set();
  auto oracle = cfg.make_oracle();
  const auto seed = rep_seed(cfg.master_seed, repetition);
  const RunRecord rec =
      iasa_run(*oracle, set, cfg.make_run_config(cfg.N, seed, set), cfg.probe);
  py::dict out;
  out["eta"] = py::cast(rec.eta);
  out["t_inner"] = py::cast(rec.t_inner);
  out["loss"] = py::cast(rec.loss);
  out["v_hat"] = py::cast(rec.v_hat);
  out["fw_gap_hat"] = py::cast(rec.fw_gap_hat);
  out["sfo_calls"] = rec.sfo_calls;
  out["lmo_calls"] = rec.lmo_calls;
  out["projection_calls"] = rec.projection_calls;
  out["output_index"] = rec.output_index;
  out["theta_out"] = array_from_point(rec.theta_out);
  out["z_out"] = array_from_point(rec.z_out);
  out["v_out"] = rec.v_out;
  out["theta_final"] = array_from_point(rec.theta_final);
  out["aborted"] = rec.aborted;
  out["abort_reason"] = rec.abort_reason;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Projection-based and projection-free stochastic approximation "
            "over Markovian data streams";
  m.attr("__version__") = kVersion;

  py::class_<FeasibleSet>(m, "FeasibleSet")
      .def_static("l1_ball", &FeasibleSet::l1_ball, py::arg("radius"),
                  py::arg("dim"))
      .def_static("nuclear_ball", &FeasibleSet::nuclear_ball,
                  py::arg("radius"), py::arg("rows"), py::arg("cols"))
      .def_static(
          "box",
          [](const Array& lo, const Array& hi) {
            return FeasibleSet::box(point_from_array(lo).values,
                                    point_from_array(hi).values);
          },
          py::arg("lo"), py::arg("hi"))
      .def_property_readonly("dim", &FeasibleSet::dim)
      .def("diameter", &FeasibleSet::diameter)
      .def(
          "lmo",
          [](const FeasibleSet& set, const Array& q) {
            return array_from_point(lmo(set, point_from_array(q)));
          },
          py::arg("q"))
      .def(
          "project",
          [](const FeasibleSet& set, const Array& p) {
            return array_from_point(project(set, point_from_array(p)));
          },
          py::arg("p"))
      .def(
          "contains",
          [](const FeasibleSet& set, const Array& p, double tol) {
            return contains(set, point_from_array(p), tol);
          },
          py::arg("p"), py::arg("tol") = 1e-9);

  py::class_<Schedule>(m, "Schedule")
      .def_static("state_dependent", &Schedule::state_dependent, py::arg("a"),
                  py::arg("horizon"))
      .def_static("state_independent", &Schedule::state_independent,
                  py::arg("horizon"))
      .def_static("custom", &Schedule::custom, py::arg("etas"),
                  py::arg("ts") = std::vector<int>{});

  m.def(
      "eta_of",
      [](const Schedule& s, int k) { return eta_of(s, k); },
      py::arg("schedule"), py::arg("k"));
  m.def(
      "t_of", [](const Schedule& s, int k) { return t_of(s, k); },
      py::arg("schedule"), py::arg("k"));

  m.def(
      "solve_exact",
      [](const FeasibleSet& set, const Array& z, const Array& theta,
         double beta) {
        return array_from_point(solve_exact(set, point_from_array(z),
                                            point_from_array(theta), beta));
      },
      py::arg("set"), py::arg("z"), py::arg("theta"), py::arg("beta") = 1.0);
  m.def(
      "icg_solve",
      [](const FeasibleSet& set, const Array& z, const Array& theta,
         double beta, double omega, int iterations) {
        return array_from_point(icg_solve(set, point_from_array(z),
                                          point_from_array(theta),
                                          {beta, omega, iterations}));
      },
      py::arg("set"), py::arg("z"), py::arg("theta"), py::arg("beta") = 1.0,
      py::arg("omega") = 1.0, py::arg("iterations") = 1);
  m.def(
      "phi_value",
      [](const FeasibleSet& set, const Array& theta, const Array& z,
         double beta) {
        return phi_value(set, point_from_array(theta), point_from_array(z),
                         beta);
      },
      py::arg("set"), py::arg("theta"), py::arg("z"), py::arg("beta") = 1.0);

  m.def(
      "gradient_mapping",
      [](const FeasibleSet& set, const Array& theta, const Array& g,
         double beta) {
        return array_from_point(gradient_mapping(
            set, point_from_array(theta), point_from_array(g), beta));
      },
      py::arg("set"), py::arg("theta"), py::arg("g"), py::arg("beta") = 1.0);
  m.def(
      "fw_gap",
      [](const FeasibleSet& set, const Array& theta, const Array& g) {
        return fw_gap(set, point_from_array(theta), point_from_array(g));
      },
      py::arg("set"), py::arg("theta"), py::arg("g"));
  m.def(
      "suboptimality_v",
      [](const FeasibleSet& set, const Array& theta, const Array& z,
         const Array& grad_f, double beta) {
        return suboptimality_v(set, point_from_array(theta),
                               point_from_array(z), point_from_array(grad_f),
                               beta);
      },
      py::arg("set"), py::arg("theta"), py::arg("z"), py::arg("grad_f"),
      py::arg("beta") = 1.0);
  m.def(
      "merit_w",
      [](double f_value, double f_star, double phi, const Array& grad_f,
         const Array& z, double alpha1) {
        return merit_w(f_value, f_star, phi, point_from_array(grad_f),
                       point_from_array(z), alpha1);
      },
      py::arg("f_value"), py::arg("f_star"), py::arg("phi"),
      py::arg("grad_f"), py::arg("z"), py::arg("alpha1") = 0.0);
  m.def(
      "sample_output_index",
      [](const std::vector<double>& etas, std::uint64_t seed) {
        Rng rng(seed);
        return sample_output_index(etas, rng);
      },
      py::arg("etas"), py::arg("seed"));

  py::class_<PyOracle>(m, "Oracle")
      .def(py::init<const std::string&>(), py::arg("environment_json"))
      .def("reset", &PyOracle::reset, py::arg("seed"))
      .def("step", &PyOracle::step, py::arg("theta"))
      .def("stoch_grad", &PyOracle::stoch_grad, py::arg("theta"),
           py::arg("x"), py::arg("y") = py::none())
      .def("loss", &PyOracle::loss, py::arg("theta"), py::arg("x"),
           py::arg("y") = py::none())
      .def("mean_gradient", &PyOracle::mean_gradient, py::arg("theta"),
           py::arg("burn_in"), py::arg("n"), py::arg("seed"))
      .def_property_readonly("theta_dim", &PyOracle::theta_dim)
      .def_property_readonly("step_count", &PyOracle::step_count);

  m.def("run_experiment", &run_experiment_json, py::arg("config_json"),
        "Run all repetitions of a JSON experiment config; returns the "
        "summary document as a JSON string.");
  m.def("run_single", &run_single_json, py::arg("config_json"),
        py::arg("repetition") = 0,
        "Run one repetition and return its trajectory record.");
  m.def("sweep", &sweep_json, py::arg("config_json"), py::arg("grid"));
  m.def(
      "property_suite",
      [](std::uint64_t seed) {
        const auto report = property_suite(seed);
        py::list items;
        for (const auto& it : report.items) {
          items.append(py::make_tuple(it.name, it.pass, it.detail));
        }
        return items;
      },
      py::arg("seed") = 12345);
  m.def(
      "ingest_agents",
      [](const std::string& path) {
        const auto table = ingest_agents(path);
        py::array_t<double> feats({table.features.rows(),
                                   table.features.cols()});
        std::copy(table.features.data(),
                  table.features.data() + table.features.size(),
                  feats.mutable_data());
        py::array_t<double> labels(table.labels.size());
        std::copy(table.labels.data(),
                  table.labels.data() + table.labels.size(),
                  labels.mutable_data());
        return py::make_tuple(feats, labels);
      },
      py::arg("path"));
}
