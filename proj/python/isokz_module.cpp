// Python bindings: matrices travel as NumPy arrays, reports as nested dicts.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "isokz/classical_isomonodromy.hpp"
#include "isokz/classical_stokes.hpp"
#include "isokz/json_io.hpp"
#include "isokz/quantum_connection.hpp"
#include "isokz/semiclassical.hpp"
#include "isokz/verify.hpp"

namespace py = pybind11;
using namespace isokz;
using io::json;

namespace {

py::object to_py(const json& j)
{
    switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<long long>());
    case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
        py::list l;
        for (const auto& x : j) l.append(to_py(x));
        return l;
    }
    case json::value_t::object: {
        py::dict d;
        for (const auto& [k, v] : j.items()) d[py::str(k)] = to_py(v);
        return d;
    }
    default: return py::none();
    }
}

isomonodromy::CartanPath make_path(const std::vector<VectorR>& waypoints)
{
    isomonodromy::CartanPath p{waypoints};
    isomonodromy::validate(p);
    return p;
}

uea::Shape quantum_shape(const isomonodromy::CartanPath& p, int hbar_order, int degree_cap)
{
    if (hbar_order < 0) throw InvalidInput("hbar_order must be non-negative");
    return {p.dim(), 2, hbar_order, degree_cap < 0 ? hbar_order + 1 : degree_cap};
}

quantum::Omega0Convention convention(const std::string& s)
{
    if (s == "2pi-i") return quantum::Omega0Convention::TwoPiI;
    if (s == "literal") return quantum::Omega0Convention::Literal;
    throw InvalidInput("convention must be '2pi-i' or 'literal'");
}

py::dict stokes(const VectorC& u, const MatrixC& v, bool skew, double tol)
{
    const classical::IrregularSystem sys{u, v, skew};
    classical::validate(sys);
    classical::Options opt;
    opt.tol = tol;
    const classical::SectorSolutions sol(sys, opt);
    const auto s = classical::stokes_matrices(sol, opt);
    const auto m = classical::monodromy_consistency(sol, s, std::min(1e-12, tol));
    py::dict out;
    out["S_plus"] = s.S_plus;
    out["S_minus"] = s.S_minus;
    out["radius_spread"] = s.radius_spread;
    out["condition"] = s.condition;
    out["monodromy_residual"] = m.residual;
    if (classical::real_ordered(sys)) out["triangularity"] = classical::triangularity_residual(s);
    return out;
}

py::list iso_flow(const std::vector<VectorR>& waypoints, const MatrixC& v0, int samples, double tol)
{
    const auto path = make_path(waypoints);
    isomonodromy::FlowOptions f;
    f.tol = tol;
    py::list out;
    for (const auto& st : isomonodromy::integrate_iso_flow(path, v0, isomonodromy::even_samples(path, samples), f)) {
        py::dict d;
        d["s"] = st.s;
        d["u"] = st.u;
        d["V"] = st.V;
        out.append(d);
    }
    return out;
}

py::list stokes_drift(const std::vector<VectorR>& waypoints, const MatrixC& v0, int samples, double tol)
{
    isomonodromy::FlowOptions f;
    f.tol = tol;
    classical::Options s;
    s.tol = tol;
    py::list out;
    for (const auto& r : isomonodromy::stokes_drift(make_path(waypoints), v0, samples, f, s)) {
        py::dict d;
        d["s"] = r.s;
        d["drift_plus"] = r.drift_plus;
        d["drift_minus"] = r.drift_minus;
        d["skewness"] = r.skewness;
        d["spectrum"] = r.spectrum;
        out.append(d);
    }
    return out;
}

py::dict quantum_stokes(const std::vector<VectorR>& waypoints, int hbar_order, int degree_cap,
                        const std::string& conv)
{
    const auto path = make_path(waypoints);
    quantum::QuantumOptions opt;
    opt.convention = convention(conv);
    const auto st = quantum::quantum_stokes_at(path, quantum_shape(path, hbar_order, degree_cap), opt);
    const auto [rp, rm] = quantum::r_matrices(st);
    py::dict out;
    out["S_plus"] = to_py(io::to_json(st.S_plus));
    out["S_minus"] = to_py(io::to_json(st.S_minus));
    out["S_plus_rep"] = uea::evaluation_rep(st.S_plus).coeffs;
    out["S_minus_rep"] = uea::evaluation_rep(st.S_minus).coeffs;
    out["ybe_R_plus"] = quantum::yang_baxter_residual(rp);
    out["ybe_R_minus"] = quantum::yang_baxter_residual(rm);
    out["radius_spread"] = st.radius_spread;
    out["lossy"] = st.lossy;
    out["convention"] = quantum::to_string(st.convention);
    return out;
}

py::dict quantum_drift(const std::vector<VectorR>& waypoints, int hbar_order, int degree_cap, int samples,
                       bool constant_omega)
{
    const auto path = make_path(waypoints);
    const auto d = quantum::quantum_isomonodromy_drift(path, quantum_shape(path, hbar_order, degree_cap), samples, {},
                                                       constant_omega);
    py::dict out;
    out["samples"] = d.samples;
    out["per_order"] = d.per_order;
    out["max_per_order"] = d.max_per_order;
    out["lossy"] = d.lossy;
    return out;
}

py::dict magnus(const std::vector<VectorR>& waypoints, int hbar_order, int degree_cap, int m)
{
    const auto path = make_path(waypoints);
    const auto shape = quantum_shape(path, hbar_order, degree_cap);
    const auto mag = quantum::magnus_terms(path, shape, m);
    const auto ode = quantum::solve_gauge_ode(path, shape);
    const auto diff = uea::log_series(ode) - mag.log_T;
    std::vector<double> per;
    for (int k = 0; k <= shape.hbar_order; ++k) per.push_back(diff.max_abs(k));
    py::dict out;
    out["log_T"] = to_py(io::to_json(mag.log_T));
    out["difference_per_order"] = per;
    out["quadrature_error"] = mag.quadrature_error;
    return out;
}

py::dict scl_check(const std::vector<VectorR>& waypoints, const MatrixC& v0, int hbar_order,
                   const std::vector<double>& scales, const std::vector<cplx>& z)
{
    const auto path = make_path(waypoints);
    const uea::Shape shape{path.dim(), 2, hbar_order, hbar_order + 1};
    const auto cas = semiclassical::scl_casimir_check(path, v0, shape, scales);
    auto scaling = [](const semiclassical::Scaling& s) {
        py::dict d;
        d["scales"] = s.scales;
        d["errors"] = s.errors;
        d["exponent"] = s.exponent;
        return d;
    };
    py::list rows;
    for (const auto& r : semiclassical::scl_solution_check(path, v0, z, shape, scales)) {
        py::dict d;
        d["z"] = r.z;
        d["sector"] = r.sector;
        d["scaling"] = scaling(r.scaling);
        rows.append(d);
    }
    py::dict out;
    out["omega_level"] = scaling(cas.scaling);
    out["h_level"] = rows;
    return out;
}

py::list conjecture_probe(const std::vector<VectorR>& waypoints, const MatrixC& v0, int hbar_order,
                          const std::vector<cplx>& z)
{
    const auto path = make_path(waypoints);
    const uea::Shape shape{path.dim(), 2, hbar_order, hbar_order + 1};
    py::list out;
    for (const auto& r : semiclassical::givental_conjecture_probe(path, v0, z, shape)) {
        py::dict d;
        d["z"] = r.z;
        d["residual"] = r.residual;
        out.append(d);
    }
    return out;
}

py::dict run_verify(const std::vector<int>& criteria, std::uint64_t seed, int jobs)
{
    verify::SuiteOptions opt;
    opt.criteria = criteria;
    opt.seed = seed;
    opt.jobs = jobs;
    std::vector<verify::CheckResult> results;
    {
        py::gil_scoped_release release;
        results = verify::run_suite(opt);
    }
    return to_py(verify::suite_report(results, opt)).cast<py::dict>();
}

} // namespace

PYBIND11_MODULE(_isokz, m)
{
    m.doc() = "Stokes data of irregular connections and their quantum counterparts";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

    m.def("stokes_matrices", &stokes, py::arg("u"), py::arg("V"), py::arg("skew") = false, py::arg("tol") = 1e-11,
          "Stokes matrices of dF/dz = (U + V/z) F with residual diagnostics.");
    m.def("iso_flow", &iso_flow, py::arg("waypoints"), py::arg("V0"), py::arg("samples") = 5, py::arg("tol") = 1e-12,
          "V(u) along a piecewise-linear path in the chamber.");
    m.def("stokes_drift", &stokes_drift, py::arg("waypoints"), py::arg("V0"), py::arg("samples") = 5,
          py::arg("tol") = 1e-11, "Stokes drift, skewness and spectrum along the isomonodromic flow.");
    m.def("quantum_stokes", &quantum_stokes, py::arg("waypoints"), py::arg("hbar_order") = 2,
          py::arg("degree_cap") = -1, py::arg("convention") = "2pi-i",
          "Truncated quantum Stokes matrices at the end of the path, with Yang-Baxter residuals.");
    m.def("quantum_drift", &quantum_drift, py::arg("waypoints"), py::arg("hbar_order") = 2, py::arg("degree_cap") = -1,
          py::arg("samples") = 4, py::arg("constant_omega") = false,
          "Per-order drift of the quantum Stokes matrices along the path.");
    m.def("magnus", &magnus, py::arg("waypoints"), py::arg("hbar_order") = 3, py::arg("degree_cap") = -1,
          py::arg("m") = 3, "log T from the Magnus expansion, compared with the gauge ODE.");
    m.def("scl_check", &scl_check, py::arg("waypoints"), py::arg("V0"), py::arg("hbar_order") = 2,
          py::arg("scales") = std::vector<double>{1.0, 0.5},
          py::arg("z") = std::vector<cplx>{cplx(0.5, 1.0), cplx(-1.0, 0.6), cplx(0.8, -0.9)},
          "Semiclassical limit against the classical flow: mismatch scaling in t.");
    m.def("conjecture_probe", &conjecture_probe, py::arg("waypoints"), py::arg("V0"), py::arg("hbar_order") = 2,
          py::arg("z") = std::vector<cplx>{cplx(0.5, 1.0), cplx(-1.0, 0.6), cplx(0.2, 0.3), cplx(1.5, 1.5),
                                           cplx(0.0, 2.0)},
          "Per-order residual of H(-z)^* H(z) = 1.");
    m.def("verify", &run_verify, py::arg("criteria") = std::vector<int>{}, py::arg("seed") = verify::kDefaultSeed,
          py::arg("jobs") = 1, "Run the acceptance suite; returns the JSON report as a dict.");
    m.def("conventions", [] { return to_py(verify::conventions()); });
}
