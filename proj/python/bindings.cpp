#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bergman/coeffs.hpp"
#include "bergman/error.hpp"
#include "bergman/exact.hpp"
#include "bergman/geometry.hpp"
#include "bergman/heat.hpp"
#include "bergman/morse.hpp"

namespace py = pybind11;
using namespace bergman;

namespace {

py::dict report_dict(const CurvatureReport& r) {
  py::dict d;
  d["point"] = r.point;
  d["rdot"] = r.rdot;
  d["levi"] = r.levi;
  d["theta"] = r.theta;
  d["eigenvalues"] = r.eigenvalues;
  d["stratum"] = r.stratum.label();
  d["q"] = r.stratum.q;
  d["degenerate"] = r.stratum.degenerate;
  d["v_theta"] = r.v_theta;
  d["det_rdot"] = r.det_rdot;
  if (r.omega) {
    const auto& o = *r.omega;
    py::dict w;
    w["omega"] = o.omega;
    w["v_omega"] = o.v_omega;
    w["r"] = o.r;
    w["r_hat"] = o.r_hat;
    w["ric"] = o.ric;
    w["rdet"] = o.rdet;
    w["ric_norm2"] = o.ric_norm2;
    w["rdet_norm2"] = o.rdet_norm2;
    w["ric_rdet_pairing"] = o.ric_rdet_pairing;
    w["rtm_norm2"] = o.rtm_norm2;
    w["laplacian_r"] = o.laplacian_r;
    w["laplacian_r_hat"] = o.laplacian_r_hat;
    d["omega"] = w;
  } else {
    d["omega"] = py::none();
  }
  return d;
}

py::dict coeff_dict(const CoefficientSet& c) {
  py::dict d;
  d["point"] = c.point;
  d["q"] = c.q;
  d["b0"] = c.b0;
  d["b1"] = c.b1;
  d["b2"] = c.b2;
  d["b0_km"] = c.b0_km;
  d["b1_km"] = c.b1_km;
  d["b2_km"] = c.b2_km;
  d["negative_directions"] = c.negative_directions;
  d["method"] = c.method;
  return d;
}

Point as_point(const py::object& z) {
  if (py::isinstance<py::float_>(z) || py::isinstance<py::int_>(z) || PyComplex_Check(z.ptr()))
    return Point{z.cast<cplx>()};
  return z.cast<Point>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bergman kernels, curvature coefficients and Morse integrals for model line bundles";

  // Messages start with the error kind, e.g. "IllConditioned: ...".
  py::register_exception<Error>(m, "BergmanError", PyExc_RuntimeError);

  py::class_<Chart>(m, "Chart")
      .def(py::init([](double radius, std::vector<double> re_lo, std::vector<double> re_hi, std::vector<double> im_lo,
                       std::vector<double> im_hi) { return Chart{radius, re_lo, re_hi, im_lo, im_hi}; }),
           py::arg("radius") = std::numeric_limits<double>::infinity(), py::arg("re_lo") = std::vector<double>{},
           py::arg("re_hi") = std::vector<double>{}, py::arg("im_lo") = std::vector<double>{},
           py::arg("im_hi") = std::vector<double>{})
      .def_readwrite("radius", &Chart::radius);

  py::class_<ModelGeometry>(m, "ModelGeometry")
      .def_static("fock", &ModelGeometry::fock, py::arg("lam"))
      .def_static("cp1_fs", &ModelGeometry::cp1_fs, py::arg("degree") = 1, py::arg("eps") = 0.0,
                  py::arg("center") = cplx(0.0), py::arg("width") = 1.0)
      .def_static("torus", &ModelGeometry::torus, py::arg("tau"), py::arg("degree"))
      .def_static("radial", &ModelGeometry::radial, py::arg("coeffs"))
      .def_static("chart_expression", &ModelGeometry::chart_expression, py::arg("n"), py::arg("weight"),
                  py::arg("theta"), py::arg("constants") = std::map<std::string, double>{}, py::arg("chart") = Chart{},
                  py::arg("rotation_invariant") = false)
      .def("with_chart", &ModelGeometry::with_chart)
      .def("with_derivative_mode",
           [](const ModelGeometry& g, const std::string& mode) {
             return g.with_derivative_mode(derivative_mode_from_string(mode));
           })
      .def_property_readonly("n", &ModelGeometry::n)
      .def_property_readonly("family", [](const ModelGeometry& g) { return std::string(to_string(g.family())); })
      .def("phi", [](const ModelGeometry& g, const py::object& z) { return g.phi(as_point(z)); })
      .def("theta", [](const ModelGeometry& g, const py::object& z) { return g.theta(as_point(z)); })
      .def("v_theta", [](const ModelGeometry& g, const py::object& z) { return g.v_theta(as_point(z)); })
      .def("__repr__", [](const ModelGeometry& g) {
        return std::string("<ModelGeometry ") + to_string(g.family()) + " n=" + std::to_string(g.n()) + ">";
      });

  m.def(
      "curvature_report",
      [](const ModelGeometry& g, const py::object& z, double tau, bool partial) {
        const Point p = as_point(z);
        return report_dict(partial ? curvature_report_partial(g, p, tau) : curvature_report(g, p, tau));
      },
      py::arg("geometry"), py::arg("z"), py::arg("tau") = kDefaultDegeneracyTol, py::arg("partial") = true);
  m.def(
      "coefficient_set",
      [](const ModelGeometry& g, const py::object& z, int q, double tau) {
        return coeff_dict(coefficient_set(g, as_point(z), q, tau));
      },
      py::arg("geometry"), py::arg("z"), py::arg("q") = 0, py::arg("tau") = kDefaultDegeneracyTol);
  m.def(
      "coefficient_set_stationary_phase",
      [](const ModelGeometry& g, const py::object& z) {
        return coeff_dict(coefficient_set_stationary_phase(g, as_point(z)));
      },
      py::arg("geometry"), py::arg("z"));

  py::class_<QuadSpec>(m, "QuadSpec")
      .def(py::init<>())
      .def_readwrite("tol", &QuadSpec::tol)
      .def_readwrite("radius", &QuadSpec::radius)
      .def_readwrite("panels", &QuadSpec::panels)
      .def_readwrite("max_panels", &QuadSpec::max_panels)
      .def_readwrite("dense_tol", &QuadSpec::dense_tol)
      .def_readwrite("theta_nodes", &QuadSpec::theta_nodes)
      .def_readwrite("max_degree", &QuadSpec::max_degree)
      .def_readwrite("threads", &QuadSpec::threads);

  py::class_<BergmanKernel>(m, "BergmanKernel")
      .def(py::init<const ModelGeometry&, int, const QuadSpec&>(), py::arg("geometry"), py::arg("k"),
           py::arg("quad") = QuadSpec{})
      .def_property_readonly("k", &BergmanKernel::k)
      .def_property_readonly("cond", &BergmanKernel::cond)
      .def_property_readonly("log10_cond_raw", &BergmanKernel::log10_cond_raw)
      .def_property_readonly("error_estimate",
                             [](const BergmanKernel& K) { return K.quadrature().error_estimate; })
      .def_property_readonly("basis_size", [](const BergmanKernel& K) { return K.basis().exponents.size(); })
      .def("gram", &BergmanKernel::gram)
      .def("value", [](const BergmanKernel& K, const py::object& z) { return K.value(as_point(z)); })
      .def("offdiag_modulus", [](const BergmanKernel& K, const py::object& z,
                                 const py::object& w) { return K.offdiag_modulus(as_point(z), as_point(w)); })
      .def("values", &BergmanKernel::values, py::arg("points"), py::arg("threads") = 1);

  m.def(
      "closed_form_kernel",
      [](const ModelGeometry& g, int k, const py::object& z) { return closed_form_kernel(g, k, as_point(z)); },
      py::arg("geometry"), py::arg("k"), py::arg("z"));
  m.def(
      "eikonal_residual",
      [](const ModelGeometry& g, int order, const py::object& z, const py::object& w, double delta) {
        return eikonal_residual(g, order, as_point(z), as_point(w), delta);
      },
      py::arg("geometry"), py::arg("psi_jet_order"), py::arg("z"), py::arg("w"), py::arg("delta") = 0.0);
  m.def(
      "expansion_fit",
      [](const ModelGeometry& g, const std::vector<int>& k_list, const py::object& z, int nuisance_terms,
         const QuadSpec& quad) {
        const Point p = as_point(z);
        FitOptions opts;
        opts.nuisance_terms = nuisance_terms;
        const auto f = expansion_fit(g, k_list, p, coefficient_set(g, p), opts, quad);
        py::dict d;
        d["k_list"] = f.k_list;
        d["values"] = f.values;
        d["residuals"] = f.residuals;
        d["slope"] = f.slope;
        d["slope_stderr"] = f.slope_stderr;
        d["fitted_b"] = f.fitted_b;
        d["predicted_b"] = f.predicted_b;
        d["design_cond"] = f.design_cond;
        return d;
      },
      py::arg("geometry"), py::arg("k_list"), py::arg("z"), py::arg("nuisance_terms") = 0,
      py::arg("quad") = QuadSpec{});

  m.def(
      "heat_trace_density",
      [](std::vector<double> eigenvalues, double t, int q, int k) {
        return heat_trace_density({std::move(eigenvalues), t, q, k});
      },
      py::arg("eigenvalues"), py::arg("t"), py::arg("q"), py::arg("k") = 1);
  m.def("heat_constant_C", &heat_constant_C);
  m.def(
      "degeneracy_bound",
      [](const std::vector<double>& a, double t, int q) {
        const auto b = degeneracy_bound(a, t, q);
        py::dict d;
        d["value"] = b.value;
        d["iota"] = b.iota;
        d["empty_regime"] = b.empty_regime;
        return d;
      },
      py::arg("eigenvalues"), py::arg("t"), py::arg("q"));

  py::class_<MorseQuad>(m, "MorseQuad")
      .def(py::init<>())
      .def_readwrite("tol", &MorseQuad::tol)
      .def_readwrite("base_cells", &MorseQuad::base_cells)
      .def_readwrite("max_depth", &MorseQuad::max_depth)
      .def_readwrite("threads", &MorseQuad::threads);

  m.def(
      "strata_integrals",
      [](const ModelGeometry& g, const MorseQuad& quad) {
        const auto s = strata_integrals(g, quad);
        py::dict d;
        d["values"] = s.values;
        d["error"] = s.error;
        d["cells"] = s.cells;
        return d;
      },
      py::arg("geometry"), py::arg("quad") = MorseQuad{});
  m.def("morse_integral", &morse_integral, py::arg("geometry"), py::arg("q"), py::arg("quad") = MorseQuad{});
  m.def("exact_dims", &exact_dims, py::arg("geometry"), py::arg("k"));
  m.def(
      "strong_morse_check",
      [](const ModelGeometry& g, int q, int k, std::optional<std::vector<long>> dims, const MorseQuad& quad) {
        const auto r = strong_morse_check(g, q, k, dims, quad);
        py::list margins;
        for (const auto& mg : r.margins) {
          py::dict e;
          e["name"] = mg.name;
          e["lhs"] = mg.lhs;
          e["rhs"] = mg.rhs;
          e["margin"] = mg.margin;
          e["holds"] = mg.holds;
          margins.append(e);
        }
        py::dict d;
        d["q"] = r.q;
        d["k"] = r.k;
        d["dims"] = r.dims;
        d["q_integrals"] = r.q_integrals;
        d["margins"] = margins;
        d["slack"] = r.slack;
        d["all_hold"] = r.all_hold;
        return d;
      },
      py::arg("geometry"), py::arg("q"), py::arg("k"), py::arg("dims") = py::none(), py::arg("quad") = MorseQuad{});
  m.def(
      "vanishing_check",
      [](const ModelGeometry& g, int q, const std::vector<int>& k_list, const MorseQuad& quad) {
        const auto r = vanishing_check(g, q, k_list, quad);
        py::list rows;
        for (const auto& row : r.rows) {
          py::dict e;
          e["k"] = row.k;
          e["dim"] = row.dim;
          e["leading"] = row.leading;
          e["ratio"] = row.ratio;
          rows.append(e);
        }
        py::dict d;
        d["q"] = r.q;
        d["n_minus"] = r.n_minus;
        d["rows"] = rows;
        d["consistent"] = r.consistent;
        return d;
      },
      py::arg("geometry"), py::arg("q"), py::arg("k_list"), py::arg("quad") = MorseQuad{});

  m.attr("__version__") = "0.1.0";
}
