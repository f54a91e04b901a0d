#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfg/config.hpp"
#include "cfg/engine.hpp"
#include "cfg/metrics.hpp"
#include "cfg/oracle.hpp"

namespace py = pybind11;
using namespace cfg;

namespace {

// Python sees samples as (n, d) rows; the library stores them as (d, n) columns.
Mat rows(const Points& x) { return x.transpose(); }
Points cols(const Mat& x) { return x.transpose(); }

RunConfig parse(const std::string& config_json) { return config_from_json(Json::parse(config_json)); }

}  // namespace

PYBIND11_MODULE(_cfgflow, m) {
  m.doc() = "Constrained functional gradient particle sampler.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ConstraintDomain>(m, "Domain")
      .def_readonly("name", &ConstraintDomain::name)
      .def_readonly("dim", &ConstraintDomain::dim)
      .def("g", [](const ConstraintDomain& d, const Vec& x) { return d.g(x); })
      .def("grad_g", [](const ConstraintDomain& d, const Vec& x) { return d.grad_g(x); })
      .def("contains", &ConstraintDomain::contains)
      .def("in_band", [](const ConstraintDomain& d, const Vec& x, double h) { return in_band(d, x, h); });

  m.def("make_domain", &make_domain, py::arg("name"), py::arg("q") = 1.0, py::arg("r") = 1.0,
        py::arg("dim") = 2);
  m.def("adaptive_bandwidth", &adaptive_bandwidth, py::arg("h0"), py::arg("d"), py::arg("n"));

  m.def("energy_distance", [](const Mat& x, const Mat& y) { return energy_distance(cols(x), cols(y)); });
  m.def(
      "sinkhorn_w2",
      [](const Mat& x, const Mat& y, double eps_rel, bool debiased) {
        SinkhornOptions o;
        o.eps_rel = eps_rel;
        o.debiased = debiased;
        return sinkhorn_w2(cols(x), cols(y), o).value;
      },
      py::arg("x"), py::arg("y"), py::arg("eps_rel") = 0.01, py::arg("debiased") = true);
  m.def("exact_w2", [](const Mat& x, const Mat& y) { return exact_w2_small(cols(x), cols(y)); });

  m.def(
      "boundary_quadrature",
      [](int density, int velocity, int resolution) {
        return boundary_quadrature(make_block(), block_density(density), block_velocity(velocity), resolution);
      },
      py::arg("density"), py::arg("velocity"), py::arg("resolution") = 2000);

  m.def(
      "oracle_sample",
      [](const std::string& config_json, long n, std::uint64_t seed) {
        const Problem p = build_problem(parse(config_json));
        return rows(rejection_sample(p.target, n, seed));
      },
      py::arg("config_json"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "run",
      [](const std::string& config_json) {
        const RunConfig c = parse(config_json);
        RunArtifacts art;
        {
          py::gil_scoped_release release;
          art = cfg_run(c);
        }
        py::list snaps;
        for (const auto& s : art.snapshots) snaps.append(py::make_tuple(s.iter, rows(s.positions)));
        py::dict out;
        out["final"] = rows(art.final_positions);
        out["snapshots"] = snaps;
        out["inside_fraction"] = art.inside_fraction;
        out["bandwidth"] = art.bandwidth;
        return out;
      },
      py::arg("config_json"));
}
