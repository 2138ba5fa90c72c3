#include <catch2/catch_amalgamated.hpp>

#include "isokz/quadrature.hpp"
#include "isokz/quantum_connection.hpp"

using namespace isokz;
using namespace isokz::quantum;
using uea::Monomial;

namespace {

VectorR vec(std::initializer_list<double> xs)
{
    VectorR v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v[k++] = x;
    return v;
}

CartanPath line(const VectorR& a, const VectorR& b) { return CartanPath{{a, b}}; }

// E_ij (x) E_kl
Monomial pair_monomial(int n, uea::Generator a, uea::Generator b)
{
    return Monomial{{uea::letter_of(n, a)}, {uea::letter_of(n, b)}};
}

const CartanPath kPath2 = line(vec({1.0, -1.0}), vec({1.1, -0.95}));
const CartanPath kPath3 = line(vec({2.0, 0.0, -1.0}), vec({2.1, 0.05, -1.02}));

} // namespace

TEST_CASE("gauge form: first integrals are log ratios", "[quantum]")
{
    const CartanPath p{{vec({2.0, 0.0, -1.0}), vec({2.2, 0.1, -1.0}), vec({2.1, 0.3, -1.2})}};
    const GaugeForm g(p);
    REQUIRE(g.pair_count() == 3);
    const auto fi = g.first_integrals();
    const auto q = quad::integrate([&](double s) { return g.f(s); }, 0.0, g.length(), g.breakpoints(), 1e-14);
    for (int k = 0; k < 3; ++k) {
        const auto [i, j] = g.pairs()[static_cast<std::size_t>(k)];
        const double exact = std::log((p.waypoints[2][i - 1] - p.waypoints[2][j - 1]) /
                                      (p.waypoints[0][i - 1] - p.waypoints[0][j - 1]));
        CHECK(std::abs(fi[k] - exact) < 1e-14);
        CHECK(std::abs(q.value[k] - exact) < 1e-12);
    }
}

TEST_CASE("magnus: first term in closed form and agreement with the gauge ODE", "[quantum]")
{
    const CartanPath p{{vec({2.0, 0.0, -1.0}), vec({2.2, 0.1, -1.0}), vec({2.1, 0.3, -1.2})}};
    const uea::Shape shape{3, 2, 3, 6};
    const auto m = magnus_terms(p, shape, 3, MagnusOptions{1e-12});
    REQUIRE(m.E.size() == 3);
    CHECK_FALSE(m.lossy);

    const auto fi = GaugeForm(p).first_integrals();
    TruncatedElement e1 = TruncatedElement::zero(shape);
    const auto pairs = positive_pairs(3);
    for (std::size_t k = 0; k < pairs.size(); ++k)
        e1 += cplx(fi[static_cast<Eigen::Index>(k)]) * gauge_generator(shape, pairs[k].first, pairs[k].second);
    CHECK((m.E[0] - e1).max_abs() < 1e-14);
    CHECK(m.E[1].max_abs() > 1e-4);  // the path bends, so E_2 is genuinely present

    const auto t = solve_gauge_ode(p, shape, 1e-13);
    const auto diff = uea::log_series(t) - m.log_T;
    for (int k = 0; k <= 3; ++k) CHECK(diff.max_abs(k) < 1e-10);
    CHECK(uea::filtration_check(m.log_T, uea::FiltrationProfile::magnus(3)));

    // both routes give the same Omega(u)
    CHECK((iso_casimir(m.log_T) - iso_casimir_from_t(t)).max_abs() < 1e-10);
}

TEST_CASE("magnus: a straight path through commuting directions has no E_2", "[quantum]")
{
    // along a dilation all f_p coincide, so [A(s), A(s')] = 0
    const CartanPath p = line(vec({1.0, 0.0, -1.0}), vec({1.5, 0.0, -1.5}));
    const auto m = magnus_terms(p, uea::Shape{3, 2, 2, 4}, 2);
    CHECK(m.E[1].max_abs() < 1e-14);
}

TEST_CASE("iso casimir: trivial path and the weight-zero part", "[quantum]")
{
    const uea::Shape shape{2, 2, 2, 3};
    const auto omega0 = iso_casimir_along(line(vec({1.0, -1.0}), vec({1.0, -1.0})), shape, {});
    CHECK((omega0 - uea::casimir(2, 2, 3)).max_abs() == 0.0);

    const auto om = iso_casimir_along(kPath2, shape, {});
    CHECK(om.max_abs(0) > 0.0);
    // hbar^0 part is Omega itself, higher orders carry the deformation
    CHECK((om.hbar_part(0) - uea::casimir(2, 2, 3)).max_abs() < 1e-15);
    CHECK(om.max_abs(1) > 1e-3);
    CHECK(uea::admissibility_check(uea::hbar_shift(om, 1), 1));
}

// At order hbar the equation for H_1 splits over E_ij (x) E_ji, each a copy of
// the rank-two nilpotent case: h' = (u_i - u_j) h + 1/z. Its branch jump on
// the negative axis gives S_hbar_minus = 1 - 2 pi i hbar sum_{i<j} E_ij (x) E_ji + O(hbar^2).
TEST_CASE("quantum stokes: order-hbar term against the exponential-integral jump", "[quantum]")
{
    for (const CartanPath* p : {&kPath2, &kPath3}) {
        const int n = p->dim();
        const uea::Shape shape{n, 2, 2, 3};
        const auto st = quantum_stokes_at(*p, shape, {});
        CHECK_FALSE(st.lossy);
        CHECK(st.radius_spread < 1e-10);
        TruncatedElement predicted = TruncatedElement::zero(shape);
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) predicted.add_term(pair_monomial(n, {i, j}, {j, i}), 1, -2.0 * kPi * kI);
        CHECK((st.S_minus.hbar_part(1) - predicted.hbar_part(1)).max_abs() < 1e-10);
        CHECK((st.S_minus.hbar_part(0) - TruncatedElement::one(shape).hbar_part(0)).max_abs() < 1e-12);
        CHECK((st.S_plus.hbar_part(0) - TruncatedElement::one(shape).hbar_part(0)).max_abs() < 1e-12);
        CHECK(uea::admissibility_check(st.S_plus, 1));
        CHECK(uea::admissibility_check(st.S_minus, 1));
    }
}

TEST_CASE("quantum stokes: the literal convention differs by exp((1 - 2 pi i) hbar Omega_0)", "[quantum]")
{
    const uea::Shape shape{2, 2, 2, 3};
    QuantumOptions lit;
    lit.convention = Omega0Convention::Literal;
    const auto a = quantum_stokes_at(kPath2, shape, {});
    const auto b = quantum_stokes_at(kPath2, shape, lit);
    const auto o0 = uea::cartan_casimir(2, 2, 3);
    const auto factor = uea::exp_series(uea::hbar_shift(cplx(1.0, -2 * kPi) * o0, 1));
    CHECK((b.S_minus - a.S_minus * factor).max_abs() < 1e-12);
    CHECK((b.S_plus - a.S_plus).max_abs() == 0.0);
    // the R-matrices do not depend on the convention
    const auto ra = r_matrices(a);
    const auto rb = r_matrices(b);
    CHECK((ra.first - rb.first).max_abs() < 1e-12);
}

TEST_CASE("quantum stokes: Yang-Baxter for R_pm", "[quantum]")
{
    for (const CartanPath* p : {&kPath2, &kPath3}) {
        const auto st = quantum_stokes_at(*p, uea::Shape{p->dim(), 2, 2, 3}, {});
        const auto [rp, rm] = r_matrices(st);
        for (const auto* r : {&rp, &rm}) {
            const auto res = yang_baxter_residual(*r);
            REQUIRE(res.size() == 3);
            CHECK(res[0] <= 1e-12);
            CHECK(res[1] <= 1e-12);
            CHECK(res[2] < 1e-8);
        }
    }
}

TEST_CASE("quantum stokes: numeric hbar in the defining representation", "[quantum]")
{
    const uea::Shape shape{2, 2, 2, 3};
    const auto omega = iso_casimir_along(kPath2, shape, {});
    const auto st = quantum_stokes_at(kPath2, shape, {});
    const std::vector<double> u{1.1, -0.95};
    const auto sp = uea::evaluation_rep(st.S_plus);
    const auto sm = uea::evaluation_rep(st.S_minus);

    // the truncation error of rep(S) at hbar = h is O(h^3)
    const double h = 1e-2;
    const auto full = finite_hbar_stokes(u, omega, h, {});
    CHECK((full.S_plus - sp.evaluate(h)).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((full.S_minus - sm.evaluate(h)).cwiseAbs().maxCoeff() < 1e-4);

    // Richardson first-order estimate converges like h^2
    const auto r1 = richardson_first_order(u, omega, h, {});
    const auto r2 = richardson_first_order(u, omega, h / 2, {});
    const double e1 = (r1.S_minus - sm.coeffs[1]).cwiseAbs().maxCoeff();
    const double e2 = (r2.S_minus - sm.coeffs[1]).cwiseAbs().maxCoeff();
    CHECK(e1 < 5e-3);
    CHECK(e1 / e2 > 3.0);
}

TEST_CASE("quantum connection: conjugation identity and flatness", "[quantum]")
{
    const uea::Shape shape{2, 2, 2, 3};
    CHECK(conjugation_identity(kPath2, shape, {}, {cplx(0.7, 0.9), cplx(-0.4, -1.1)}) < 1e-10);

    const CartanPath bent{{vec({2.0, 0.0, -1.0}), vec({2.1, 0.05, -1.0}), vec({2.15, 0.1, -1.05})}};
    const uea::Shape s3{3, 2, 2, 3};
    const auto flat = ikz_flatness_residual(bent, s3, {});
    const auto ctl = ikz_flatness_residual(bent, s3, {}, 1e-2, true);
    for (double x : flat.z0) CHECK(x < 1e-12);
    for (double x : flat.z1) CHECK(x < 1e-6);
    CHECK(ctl.z1.back() > 1e-2);
}

TEST_CASE("quantum isomonodromy: drift and constant-Omega control", "[quantum]")
{
    const uea::Shape shape{2, 2, 2, 3};
    const auto d = quantum_isomonodromy_drift(kPath2, shape, 3, {});
    const auto c = quantum_isomonodromy_drift(kPath2, shape, 3, {}, true);
    REQUIRE(d.max_per_order.size() == 3);
    for (double x : d.max_per_order) CHECK(x < 1e-9);
    CHECK(c.max_per_order[2] > 1e-2);
}

TEST_CASE("quantum connection: invalid input", "[quantum]")
{
    const uea::Shape bad{2, 3, 2, 3};
    CHECK_THROWS_AS(magnus_terms(kPath2, bad, 2), InvalidInput);
    CHECK_THROWS_AS(magnus_terms(kPath2, uea::Shape{2, 2, 4, 8}, 4), InvalidInput);
    CHECK_THROWS_AS(iso_casimir_along(kPath2, uea::Shape{3, 2, 2, 3}, {}), InvalidInput);
}
