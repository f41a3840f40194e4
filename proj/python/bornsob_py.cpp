#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bornsob/bounds.hpp"
#include "bornsob/invert.hpp"
#include "bornsob/series.hpp"
#include "bornsob/sobolev.hpp"

namespace py = pybind11;
using namespace bornsob;

namespace {

using RealImage = py::array_t<double, py::array::c_style | py::array::forcecast>;

GridField image_to_field(const RealImage& img, const SolverSetup& setup) {
  GridField f = setup.model_zeros();
  if (img.ndim() != 2 || std::size_t(img.shape(0)) != f.shape[0] || std::size_t(img.shape(1)) != f.shape[1])
    throw DomainError("expected an array of shape (nz, nx) = (" + std::to_string(f.shape[0]) + ", " +
                      std::to_string(f.shape[1]) + ")");
  const double* p = img.data();
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = p[i];
  return f;
}

RealImage field_to_image(const GridField& f) {
  RealImage out({py::ssize_t(f.shape[0]), py::ssize_t(f.shape[1])});
  double* p = out.mutable_data();
  for (std::size_t i = 0; i < f.size(); ++i) p[i] = f.values[i].real();
  return out;
}

py::dict report_dict(const BoundsReport& r) {
  py::dict d;
  d["mu"] = r.mu;
  d["nu"] = r.nu;
  d["c_a"] = r.c_a;
  d["r_forward"] = r.r_forward;
  d["r_classic"] = r.r_classic;
  d["r_geometric"] = r.r_geometric;
  d["C"] = r.C;
  d["C_star"] = r.C_star;
  d["C_tilde"] = r.C_tilde;
  d["C_ab"] = r.C_ab;
  d["C1"] = r.C1;
  d["lmax"] = r.lmax;
  d["flags"] = r.flags;
  return d;
}

ScatteringConfig geometry(const std::string& kind, double k, double ball_radius, int a_param, double b_data) {
  auto cfg = ScatteringConfig::offset_geometry(parse_wave_kind(kind), k);
  cfg.ball_radius = ball_radius;
  cfg.sobolev = {a_param, b_data};
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_bornsob, m) {
  m.doc() = "Convergence bounds and Sobolev-norm inversion for Born series";
  m.attr("__version__") = kVersion;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);

  m.def("poincare_constant", &poincare_constant, py::arg("s"), py::arg("a"), py::arg("n") = 3);
  m.def(
      "greens_value",
      [](const std::string& kind, double k, double r, int dim) {
        return greens_value(WaveParams{k, parse_wave_kind(kind), dim}, r);
      },
      py::arg("kind"), py::arg("k"), py::arg("r"), py::arg("dim") = 3);

  m.def(
      "mu",
      [](const std::string& kind, double k, double ball_radius, int a_param) {
        return mu_closed_form(geometry(kind, k, ball_radius, a_param, 0.0));
      },
      py::arg("kind"), py::arg("k") = 1.0, py::arg("ball_radius") = 1.0, py::arg("a_param") = 0);
  m.def(
      "bounds_report",
      [](const std::string& kind, double k, double ball_radius, int a_param, double b_data, double Q) {
        BoundsOptions opt;
        opt.Q = Q;
        return report_dict(compute_report(geometry(kind, k, ball_radius, a_param, b_data), opt));
      },
      py::arg("kind"), py::arg("k") = 1.0, py::arg("ball_radius") = 1.0, py::arg("a_param") = 0,
      py::arg("b_data") = 0.0, py::arg("Q") = 0.5);
  m.def("radius_classic", &radius_classic, py::arg("mu"), py::arg("nu"));
  m.def("radius_geometric", &radius_geometric, py::arg("mu"), py::arg("nu"), py::arg("k1_norm"));

  m.def(
      "forward_series_1d",
      [](const std::string& kind, double k, std::size_t nodes, double scale, int N) {
        const auto scene = make_scene_1d(WaveParams{k, parse_wave_kind(kind), 1}, 1.0, nodes);
        Eigen::VectorXcd eta(Eigen::Index(scene.n_nodes()));
        for (std::size_t i = 0; i < scene.n_nodes(); ++i) {
          const double r = norm3(scene.nodes[i]);
          eta(Eigen::Index(i)) = scale * std::exp(-4.0 * r * r);
        }
        return py::make_tuple(Eigen::MatrixXcd(forward_born(eta, scene, N)), Eigen::MatrixXcd(solve_direct(eta, scene)));
      },
      "Partial Born sum through N and the direct solve for a Gaussian contrast on [-1, 1].", py::arg("kind"),
      py::arg("k") = 1.0, py::arg("nodes") = 64, py::arg("scale") = 0.1, py::arg("N") = 10);

  py::class_<SolverSetup>(m, "SolverSetup")
      .def_static("standard", &SolverSetup::standard, py::arg("dx") = 0.02)
      .def_readwrite("omega", &SolverSetup::omega)
      .def_readwrite("c0", &SolverSetup::c0)
      .def_readonly("dx", &SolverSetup::dx)
      .def_readonly("nx", &SolverSetup::nx)
      .def_readonly("nz", &SolverSetup::nz)
      .def_property_readonly("k", &SolverSetup::k)
      .def_property_readonly("n_sources", [](const SolverSetup& s) { return s.sources.size(); })
      .def_property_readonly("n_receivers", [](const SolverSetup& s) { return s.receivers.size(); });

  py::class_<HelmholtzSolver>(m, "HelmholtzSolver")
      .def(py::init<SolverSetup>(), py::arg("setup"))
      .def(
          "forward_map",
          [](const HelmholtzSolver& s, const RealImage& eta) {
            return Eigen::MatrixXcd(s.forward_map(image_to_field(eta, s.setup())));
          },
          "Receiver x source scattered data for a contrast image of shape (nz, nx).", py::arg("eta"));

  m.def(
      "scatterer",
      [](const std::string& kind, double amplitude, double dx) {
        ScattererSpec spec;
        spec.kind = parse_scatterer_kind(kind);
        spec.amplitude = amplitude;
        return field_to_image(make_scatterer(spec, SolverSetup::standard(dx)));
      },
      py::arg("kind") = "rough", py::arg("amplitude") = 0.1, py::arg("dx") = 0.02);

  m.def(
      "invert",
      [](int setting, int a_param, double b_data, double noise, std::uint64_t seed, int iterations, double dx) {
        auto cfg = InversionConfig::setting(setting, {a_param, b_data}, noise, dx);
        cfg.seed = seed;
        cfg.iterations = iterations;
        InversionTrace t;
        {
          py::gil_scoped_release release;
          t = run_inversion(cfg);
        }
        py::dict d;
        std::vector<double> J, err, grad;
        for (const auto& r : t.rows) {
          J.push_back(r.J);
          err.push_back(r.model_error);
          grad.push_back(r.grad_norm);
        }
        d["J"] = J;
        d["model_error"] = err;
        d["grad_norm"] = grad;
        d["estimate"] = field_to_image(t.estimate);
        d["truth"] = field_to_image(t.truth);
        d["line_search_failed"] = t.line_search_failed;
        return d;
      },
      py::arg("setting") = 1, py::arg("a_param") = 0, py::arg("b_data") = 0.0, py::arg("noise") = 0.0,
      py::arg("seed") = 7, py::arg("iterations") = 100, py::arg("dx") = 0.02);
}
