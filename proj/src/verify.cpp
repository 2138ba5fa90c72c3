#include "isokz/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <thread>

#include "isokz/classical_isomonodromy.hpp"
#include "isokz/classical_stokes.hpp"
#include "isokz/quantum_connection.hpp"
#include "isokz/semiclassical.hpp"

namespace isokz::verify {

namespace {

// Pinned acceptance tolerances.
constexpr double kTrivialTol = 1e-12;
constexpr double kMonodromyTol = 1e-8;
constexpr double kTriangularTol = 1e-8;
constexpr double kSkewTol = 1e-8;
constexpr double kClassicalDriftTol = 1e-6;
constexpr double kHalvingRatio = 2.0;
constexpr double kFlowInvariantTol = 1e-8;
constexpr double kMagnusQuadTol = 1e-10;
constexpr double kMagnusFactor = 10.0;
constexpr double kQuantumDriftTol = 1e-6;
constexpr double kControlDriftMin = 1e-2;
constexpr double kYbeLowTol = 1e-12;
constexpr double kYbeTol = 1e-8;
constexpr double kExponentLo = 0.7;   // relative to D_2
constexpr double kExponentHi = 1.3;
constexpr double kProbeTol = kSkewTol;

using io::json;
using uea::Shape;

struct Ctx {
    std::mt19937_64 rng;
    int digits;
    json num(double x) const { return io::number(x, digits); }
};

double uniform(Ctx& c, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(c.rng); }

// Strictly decreasing real u with gaps in [0.7, 1.5], centred at 0.
VectorR random_u(Ctx& c, int n)
{
    VectorR u(n);
    u[0] = 0.0;
    for (int i = 1; i < n; ++i) u[i] = u[i - 1] - uniform(c, 0.7, 1.5);
    return u.array() - u.mean();
}

MatrixC random_skew(Ctx& c, int n, double frob)
{
    MatrixC v = MatrixC::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            v(i, j) = cplx(uniform(c, -1, 1), uniform(c, -1, 1));
            v(j, i) = -v(i, j);
        }
    return v * (frob / v.norm());
}

isomonodromy::CartanPath segment(const VectorR& a, const VectorR& b)
{
    isomonodromy::CartanPath p;
    p.waypoints = {a, b};
    return p;
}

VectorR vec(std::initializer_list<double> xs)
{
    VectorR v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v[k++] = x;
    return v;
}

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string sci(double x) { return fmt("%.2e", x); }

CheckResult make(int k, bool passed, std::string summary, json details)
{
    return {k, criterion_name(k), passed, std::move(summary), std::move(details)};
}

// 1. V = 0 and diagonal V give S_pm = I.
CheckResult trivial_stokes(Ctx& c)
{
    double worst = 0.0;
    json rows = json::array();
    for (int n = 2; n <= 4; ++n) {
        const VectorR u = random_u(c, n);
        for (int kind = 0; kind < 2; ++kind) {
            classical::IrregularSystem sys;
            sys.u = u.cast<cplx>();
            sys.V = MatrixC::Zero(n, n);
            if (kind == 1)
                for (int i = 0; i < n; ++i) sys.V(i, i) = cplx(uniform(c, -0.5, 0.5), uniform(c, -0.5, 0.5));
            const auto s = classical::stokes_matrices(sys);
            const MatrixC id = MatrixC::Identity(n, n);
            const double d = std::max((s.S_plus - id).cwiseAbs().maxCoeff(), (s.S_minus - id).cwiseAbs().maxCoeff());
            worst = std::max(worst, d);
            rows.push_back({{"n", n}, {"V", kind == 0 ? "zero" : "diagonal"}, {"deviation", c.num(d)}});
        }
    }
    return make(1, worst < kTrivialTol, "max |S - I| = " + sci(worst) + " (tol " + sci(kTrivialTol) + ")",
                {{"cases", rows}, {"tolerance", c.num(kTrivialTol)}});
}

struct SkewCase {
    classical::IrregularSystem sys;
    classical::StokesPair stokes;
    std::unique_ptr<classical::SectorSolutions> sol;
};

std::vector<SkewCase> skew_cases(Ctx& c)
{
    std::vector<SkewCase> out;
    for (int n : {2, 3}) {
        for (int rep = 0; rep < 2; ++rep) {
            SkewCase sc;
            sc.sys.u = random_u(c, n).cast<cplx>();
            sc.sys.V = random_skew(c, n, uniform(c, 0.25, 0.5));
            sc.sys.skew = true;
            sc.sol = std::make_unique<classical::SectorSolutions>(sc.sys, classical::Options{});
            sc.stokes = classical::stokes_matrices(*sc.sol, classical::Options{});
            out.push_back(std::move(sc));
        }
    }
    return out;
}

// 2. Continuation of F_+ once around 0 against the Stokes factorization.
CheckResult monodromy(Ctx& c)
{
    double worst = 0.0;
    json rows = json::array();
    for (auto& sc : skew_cases(c)) {
        const auto rep = classical::monodromy_consistency(*sc.sol, sc.stokes, 1e-12);
        worst = std::max({worst, rep.residual, rep.path_disagreement});
        rows.push_back({{"n", sc.sys.u.size()},
                        {"norm_V", c.num(sc.sys.V.norm())},
                        {"residual", c.num(rep.residual)},
                        {"path_disagreement", c.num(rep.path_disagreement)},
                        {"liouville", c.num(rep.liouville)}});
    }
    return make(2, worst < kMonodromyTol, "max monodromy residual = " + sci(worst) + " (tol " + sci(kMonodromyTol) + ")",
                {{"cases", rows}, {"tolerance", c.num(kMonodromyTol)}});
}

// 3. Unipotent triangular shape, with the continuation oracle alongside.
CheckResult triangularity(Ctx& c)
{
    double worst = 0.0;
    json rows = json::array();
    for (auto& sc : skew_cases(c)) {
        const double tri = classical::triangularity_residual(sc.stokes);
        const auto rep = classical::monodromy_consistency(*sc.sol, sc.stokes, 1e-12);
        worst = std::max({worst, tri, rep.residual});
        rows.push_back({{"n", sc.sys.u.size()},
                        {"triangularity", c.num(tri)},
                        {"continuation_residual", c.num(rep.residual)},
                        {"radius_spread", c.num(sc.stokes.radius_spread)}});
    }
    return make(3, worst < kTriangularTol, "max residual = " + sci(worst) + " (tol " + sci(kTriangularTol) + ")",
                {{"cases", rows}, {"tolerance", c.num(kTriangularTol)}});
}

// 4. H_-(-z)^T H_+(z) = I for skew V.
CheckResult skew_identity(Ctx& c)
{
    double worst = 0.0;
    json rows = json::array();
    const auto samples = classical::default_skew_samples();
    for (auto& sc : skew_cases(c)) {
        const auto r = classical::skew_symmetry_identity(*sc.sol, samples);
        const double m = *std::max_element(r.begin(), r.end());
        worst = std::max(worst, m);
        rows.push_back({{"n", sc.sys.u.size()}, {"samples", r.size()}, {"max_residual", c.num(m)}});
    }
    return make(4, worst < kSkewTol && samples.size() >= 5,
                "max |H(-z)^T H(z) - I| = " + sci(worst) + " over " + std::to_string(samples.size()) + " samples",
                {{"cases", rows}, {"tolerance", c.num(kSkewTol)}});
}

// 5. Classical Stokes data along the isomonodromic flow.
CheckResult classical_isomonodromy(Ctx& c)
{
    const int n = 3;
    const MatrixC v0 = random_skew(c, n, 0.3);
    const VectorR a = vec({1.0, 0.0, -1.0});
    VectorR d = vec({1.0, -0.5, -1.0});
    d *= 0.5 / d.norm();
    const auto path = segment(a, a + d);
    const int samples = 5;

    classical::Options tight;
    tight.tol = 1e-13;
    const auto ref = classical::stokes_matrices(classical::IrregularSystem{a.cast<cplx>(), v0, true}, tight);

    auto run = [&](double tol) {
        isomonodromy::FlowOptions f;
        f.tol = tol;
        classical::Options s;
        s.tol = tol;
        return isomonodromy::stokes_drift(path, v0, samples, f, s, &ref);
    };
    auto worst = [](const std::vector<isomonodromy::DriftRow>& rows, auto field) {
        double m = 0.0;
        for (const auto& r : rows) m = std::max(m, field(r));
        return m;
    };
    auto drift_of = [](const isomonodromy::DriftRow& r) { return std::max(r.drift_plus, r.drift_minus); };

    const auto base = run(1e-11);
    const double drift = worst(base, drift_of);
    const double skewness = worst(base, [](const auto& r) { return r.skewness; });
    const double spectrum = worst(base, [](const auto& r) { return r.spectrum; });

    json ladder = json::array();
    bool halves = true;
    double prev = 0.0;
    for (double tol : {1e-6, 5e-7, 2.5e-7}) {
        const double dr = worst(run(tol), drift_of);
        json row = {{"tol", c.num(tol)}, {"drift", c.num(dr)}};
        if (prev > 0) {
            row["ratio"] = c.num(prev / dr);
            halves = halves && prev / dr >= kHalvingRatio;
        }
        ladder.push_back(std::move(row));
        prev = dr;
    }
    const bool ok = drift < kClassicalDriftTol && halves && skewness < kFlowInvariantTol && spectrum < kFlowInvariantTol;
    return make(5, ok,
                "drift " + sci(drift) + ", halving " + (halves ? "yes" : "no") + ", skewness " + sci(skewness) +
                    ", spectrum " + sci(spectrum),
                {{"drift", c.num(drift)},
                 {"skewness", c.num(skewness)},
                 {"spectrum_drift", c.num(spectrum)},
                 {"tolerance_ladder", ladder},
                 {"path_length", c.num(path.length())},
                 {"norm_V0", c.num(v0.norm())}});
}

// 6. Magnus expansion against the order-by-order gauge ODE, through hbar^3.
CheckResult magnus_vs_ode(Ctx& c)
{
    json rows = json::array();
    double worst = 0.0;
    const double limit = kMagnusFactor * kMagnusQuadTol;
    for (int n : {2, 3}) {
        isomonodromy::CartanPath path;
        if (n == 2)
            path.waypoints = {vec({1.0, -1.0}), vec({1.3, -0.8}), vec({1.1, -1.2})};
        else
            path.waypoints = {vec({2.0, 0.0, -1.0}), vec({2.3, 0.2, -1.0}), vec({2.1, 0.4, -1.3})};
        const Shape shape{n, 2, 3, 6};
        quantum::MagnusOptions mo;
        mo.tol = kMagnusQuadTol;
        const auto m = quantum::magnus_terms(path, shape, 3, mo);
        const auto t = quantum::solve_gauge_ode(path, shape, 1e-13);
        const auto diff = uea::log_series(t) - m.log_T;
        json per = json::array();
        for (int k = 0; k <= 3; ++k) {
            per.push_back(c.num(diff.max_abs(k)));
            worst = std::max(worst, diff.max_abs(k));
        }
        rows.push_back({{"n", n},
                        {"per_order", per},
                        {"E_norms", {c.num(m.E[0].max_abs()), c.num(m.E[1].max_abs()), c.num(m.E[2].max_abs())}},
                        {"lossy", m.lossy || t.lossy()}});
        if (m.lossy || t.lossy()) worst = INFINITY;
    }
    return make(6, worst <= limit, "max |log T - Magnus| through hbar^3 = " + sci(worst) + " (limit " + sci(limit) + ")",
                {{"cases", rows}, {"quadrature_tol", c.num(kMagnusQuadTol)}});
}

// 7. Exact identities on truncated data.
CheckResult exact_identities(Ctx& c)
{
    json rows = json::array();
    bool ok = true;
    for (int n : {2, 3}) {
        const auto path = n == 2 ? segment(vec({1.0, -1.0}), vec({1.2, -0.9}))
                                 : segment(vec({2.0, 0.0, -1.0}), vec({2.2, 0.1, -1.1}));
        const Shape shape{n, 2, 2, 3};
        const auto omega = quantum::iso_casimir_along(path, shape, {});
        const auto I = semiclassical::scl(uea::hbar_shift(omega, 1));
        const double prim = semiclassical::primitivity_residual(I);
        const double control = semiclassical::primitivity_residual(
            semiclassical::scl(uea::hbar_shift(omega * omega, 2)));
        const bool adm_omega = uea::admissibility_check(uea::hbar_shift(omega, 1), 1);
        const auto st = quantum::quantum_stokes_at(path, shape, {});
        const bool adm_s = uea::admissibility_check(st.S_plus, 1) && uea::admissibility_check(st.S_minus, 1);
        const Shape big{n, 2, 3, 6};
        const auto logt = quantum::magnus_terms(path, big, 3).log_T;
        const bool filt = uea::filtration_check(logt, uea::FiltrationProfile::magnus(3));
        ok = ok && prim == 0.0 && adm_omega && adm_s && filt && !omega.lossy() && !st.lossy;
        rows.push_back({{"n", n},
                        {"primitivity_residual", c.num(prim)},
                        {"control_omega_squared", c.num(control)},
                        {"admissible_hbar_omega", adm_omega},
                        {"admissible_stokes", adm_s},
                        {"filtration_log_T", filt}});
    }
    return make(7, ok, ok ? "all identities exact" : "an identity failed", {{"cases", rows}});
}

// 8. Quantum Stokes matrices along the isomonodromic family, and the control.
CheckResult quantum_isomonodromy(Ctx& c)
{
    const Shape shape{2, 2, 2, 3};
    const auto path = segment(vec({1.0, -1.0}), vec({1.1, -0.95}));
    const quantum::QuantumOptions opt;
    const auto iso = quantum::quantum_isomonodromy_drift(path, shape, 4, opt, false);
    const auto ctl = quantum::quantum_isomonodromy_drift(path, shape, 4, opt, true);
    const double drift = *std::max_element(iso.max_per_order.begin(), iso.max_per_order.end());
    const double control1 = ctl.max_per_order[1];
    const bool ok = drift < kQuantumDriftTol && control1 > kControlDriftMin && !iso.lossy;
    return make(8, ok,
                "drift " + sci(drift) + " (tol " + sci(kQuantumDriftTol) + "), control at hbar^1 " + sci(control1) +
                    " (needs > " + sci(kControlDriftMin) + "), control at hbar^2 " + sci(ctl.max_per_order[2]),
                {{"drift_per_order", io::to_json(iso.max_per_order, c.digits)},
                 {"control_per_order", io::to_json(ctl.max_per_order, c.digits)},
                 {"samples", io::to_json(iso.samples, c.digits)}});
}

// 9. Yang-Baxter equation for R_pm.
CheckResult yang_baxter(Ctx& c)
{
    json rows = json::array();
    bool ok = true;
    double worst2 = 0.0;
    for (int n : {2, 3}) {
        const auto path = n == 2 ? segment(vec({1.0, -1.0}), vec({1.1, -0.95}))
                                 : segment(vec({2.0, 0.0, -1.0}), vec({2.1, 0.05, -1.02}));
        const Shape shape{n, 2, 2, 3};
        const auto st = quantum::quantum_stokes_at(path, shape, {});
        const auto [rp, rm] = quantum::r_matrices(st);
        for (const auto* r : {&rp, &rm}) {
            const auto res = quantum::yang_baxter_residual(*r);
            ok = ok && res[0] <= kYbeLowTol && res[1] <= kYbeLowTol && res[2] < kYbeTol;
            worst2 = std::max(worst2, res[2]);
            rows.push_back({{"n", n}, {"R", r == &rp ? "plus" : "minus"}, {"per_order", io::to_json(res, c.digits)}});
        }
    }
    return make(9, ok, "order hbar^2 residual " + sci(worst2) + " (tol " + sci(kYbeTol) + ")", {{"cases", rows}});
}

bool exponent_ok(double e, int d2) { return std::isfinite(e) && e >= d2 + kExponentLo && e <= d2 + kExponentHi; }

json scaling_json(const semiclassical::Scaling& s, const Ctx& c)
{
    return {{"scales", io::to_json(s.scales, c.digits)},
            {"errors", io::to_json(s.errors, c.digits)},
            {"exponent", c.num(s.exponent)}};
}

// 10. Semiclassical limit against the classical deformation and solutions.
CheckResult semiclassical_bridge(Ctx& c)
{
    const int d2 = 2;
    const Shape shape{2, 2, d2, d2 + 1};
    const auto path = segment(vec({1.0, -1.0}), vec({1.2, -0.9}));
    const MatrixC v0 = random_skew(c, 2, 0.1);
    const auto cas = semiclassical::scl_casimir_check(path, v0, shape);
    const std::vector<cplx> zs{cplx(0.5, 1.0), cplx(-1.0, 0.6), cplx(0.8, -0.9), cplx(0.0, 2.0)};
    const auto sol = semiclassical::scl_solution_check(path, v0, zs, shape);
    bool h_ok = sol.size() >= 3;
    json hrows = json::array();
    for (const auto& r : sol) {
        h_ok = h_ok && exponent_ok(r.scaling.exponent, d2);
        hrows.push_back({{"z", io::to_json(r.z, c.digits)}, {"sector", r.sector}, {"scaling", scaling_json(r.scaling, c)}});
    }
    const bool omega_ok = exponent_ok(cas.scaling.exponent, d2);

    // supplementary, not gating: n = 3, where the classical flow is not trivial
    const Shape shape3{3, 2, d2, d2 + 1};
    const auto path3 = segment(vec({2.0, 0.0, -1.0}), vec({2.2, 0.1, -1.1}));
    const auto cas3 = semiclassical::scl_casimir_check(path3, random_skew(c, 3, 0.1), shape3);

    return make(10, omega_ok && h_ok,
                "Omega-level exponent " + fmt("%.3f", cas.scaling.exponent) + (omega_ok ? "" : " (out of range)") +
                    ", H-level " + (h_ok ? "all in range" : "out of range") + ", n=3 Omega-level " +
                    fmt("%.3f", cas3.scaling.exponent),
                {{"omega_level", scaling_json(cas.scaling, c)},
                 {"h_level", hrows},
                 {"window", {c.num(d2 + kExponentLo), c.num(d2 + kExponentHi)}},
                 {"supplementary_n3_omega_level", scaling_json(cas3.scaling, c)}});
}

// 11. H(-z)^* H(z) = 1 probe; only order 0 gates.
CheckResult conjecture_probe(Ctx& c)
{
    json rows = json::array();
    double worst0 = 0.0;
    const std::vector<cplx> zs{cplx(0.5, 1.0), cplx(-1.0, 0.6), cplx(0.2, 0.3), cplx(1.5, 1.5), cplx(0.0, 2.0)};
    for (int n : {2, 3}) {
        const auto path = n == 2 ? segment(vec({1.0, -1.0}), vec({1.2, -0.9}))
                                 : segment(vec({2.0, 0.0, -1.0}), vec({2.2, 0.1, -1.1}));
        const Shape shape{n, 2, 2, 3};
        const auto probe = semiclassical::givental_conjecture_probe(path, random_skew(c, n, 0.1), zs, shape);
        for (const auto& r : probe) {
            worst0 = std::max(worst0, r.residual[0]);
            rows.push_back({{"n", n}, {"z", io::to_json(r.z, c.digits)}, {"per_order", io::to_json(r.residual, c.digits)}});
        }
    }
    return make(11, worst0 < kProbeTol, "order-0 residual " + sci(worst0) + " (tol " + sci(kProbeTol) + "); higher orders reported",
                {{"rows", rows}});
}

// 12. Byte-identical reports for a repeated run with a different worker count.
CheckResult determinism(Ctx& c, const SuiteOptions& opt)
{
    SuiteOptions a = opt;
    a.criteria = {1, 6, 7, 9};
    a.jobs = 1;
    SuiteOptions b = a;
    b.jobs = 3;
    const std::string ra = io::dump(suite_report(run_suite(a), a)["checks"]);
    const std::string rb = io::dump(suite_report(run_suite(b), b)["checks"]);
    return make(12, ra == rb, ra == rb ? "repeated reports identical" : "repeated reports differ",
                {{"criteria", a.criteria}, {"bytes", ra.size()}, {"seed", c.num(static_cast<double>(opt.seed))}});
}

} // namespace

std::string criterion_name(int k)
{
    static const char* names[] = {"trivial-stokes",     "monodromy",       "triangularity",
                                  "skew-identity",      "classical-isomonodromy", "magnus-vs-ode",
                                  "exact-identities",   "quantum-isomonodromy",   "yang-baxter",
                                  "semiclassical-bridge", "conjecture-probe", "determinism"};
    if (k < 1 || k > kCriteria) throw InvalidInput("criterion must be between 1 and 12");
    return names[k - 1];
}

CheckResult run_criterion(int k, const SuiteOptions& opt)
{
    Ctx c{std::mt19937_64(opt.seed + 7919ULL * static_cast<std::uint64_t>(k)), opt.digits};
    try {
        switch (k) {
        case 1: return trivial_stokes(c);
        case 2: return monodromy(c);
        case 3: return triangularity(c);
        case 4: return skew_identity(c);
        case 5: return classical_isomonodromy(c);
        case 6: return magnus_vs_ode(c);
        case 7: return exact_identities(c);
        case 8: return quantum_isomonodromy(c);
        case 9: return yang_baxter(c);
        case 10: return semiclassical_bridge(c);
        case 11: return conjecture_probe(c);
        case 12: return determinism(c, opt);
        default: throw InvalidInput("criterion must be between 1 and 12");
        }
    } catch (const NumericalFailure& e) {
        return make(k, false, std::string("numerical failure: ") + e.what(), {{"error", e.what()}});
    }
}

std::vector<CheckResult> run_suite(const SuiteOptions& opt)
{
    std::vector<int> ks = opt.criteria;
    if (ks.empty())
        for (int k = 1; k <= kCriteria; ++k) ks.push_back(k);
    for (int k : ks) criterion_name(k);
    std::vector<CheckResult> out(ks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < ks.size(); i = next++) out[i] = run_criterion(ks[i], opt);
    };
    const int jobs = std::clamp(opt.jobs, 1, static_cast<int>(ks.size()));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

json conventions()
{
    return {{"normalization", "H -> 1 at z = infinity"},
            {"stokes_minus", quantum::to_string(quantum::Omega0Convention::TwoPiI)},
            {"log_branch", "cut on the negative real axis, arg in (-pi, pi]"},
            {"pbw_order", "column-major"},
            {"precision", "double"}};
}

json suite_report(const std::vector<CheckResult>& results, const SuiteOptions& opt)
{
    json checks = json::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        checks.push_back({{"criterion", r.criterion},
                          {"name", r.name},
                          {"passed", r.passed},
                          {"summary", r.summary},
                          {"details", r.details}});
    }
    return {{"suite", "desk"},
            {"seed", opt.seed},
            {"conventions", conventions()},
            {"checks", std::move(checks)},
            {"passed", all}};
}

std::string result_line(const CheckResult& r)
{
    return "criterion " + std::to_string(r.criterion) + " " + r.name + ": " + (r.passed ? "PASS" : "FAIL") + " (" +
           r.summary + ")";
}

} // namespace isokz::verify
