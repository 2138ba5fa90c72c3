#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "isokz/ode.hpp"
#include "isokz/quadrature.hpp"
#include "isokz/sectorial.hpp"

using namespace isokz;

TEST_CASE("ode: linear scalar and rotation systems", "[ode]")
{
    const ode::Rhs f = [](double, const VectorC& y, VectorC& dy) { dy = kI * y; };
    VectorC y0(1);
    y0 << 1.0;
    const VectorC y = ode::integrate(f, 0.0, 3.0, y0);
    CHECK(std::abs(y[0] - std::exp(3.0 * kI)) < 1e-10);

    // backwards to the start
    const VectorC back = ode::integrate(f, 3.0, 0.0, y);
    CHECK(std::abs(back[0] - 1.0) < 1e-10);

    const ode::Rhs rot = [](double, const VectorC& v, VectorC& dv) {
        dv.resize(2);
        dv << -v[1], v[0];
    };
    VectorC r0(2);
    r0 << 1.0, 0.0;
    const VectorC r = ode::integrate(rot, 0.0, 2.0, r0);
    CHECK(std::abs(r[0] - std::cos(2.0)) < 1e-10);
    CHECK(std::abs(r[1] - std::sin(2.0)) < 1e-10);
}

TEST_CASE("ode: global error tracks the tolerance", "[ode]")
{
    const ode::Rhs f = [](double t, const VectorC& y, VectorC& dy) { dy = std::cos(5 * t) * y; };
    VectorC y0(1);
    y0 << 1.0;
    const cplx exact = std::exp(std::sin(5.0 * 4.0) / 5.0);
    double prev = 0.0;
    for (double tol : {1e-5, 5e-6, 2.5e-6}) {
        ode::Options o;
        o.rtol = tol;
        o.atol = tol;
        const double err = std::abs(ode::integrate(f, 0.0, 4.0, y0, o)[0] - exact);
        CHECK(err < 10 * tol);
        if (prev > 0) CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("ode: complex paths", "[ode]")
{
    const ode::ZRhs ident = [](cplx, const VectorC& y, VectorC& dy) { dy = y; };
    VectorC y0(1);
    y0 << 1.0;
    // e^z transported along an arc
    const VectorC a = ode::along(ident, ode::Arc{2.0, 0.0, 2.5}, y0 * std::exp(cplx(2.0, 0.0)));
    CHECK(std::abs(a[0] - std::exp(2.0 * std::exp(2.5 * kI))) < 1e-9);

    // d/dz log z = 1/z along a segment avoiding 0
    const ode::ZRhs inv = [](cplx z, const VectorC&, VectorC& dy) {
        dy.resize(1);
        dy << 1.0 / z;
    };
    VectorC l0(1);
    l0 << 0.0;
    const cplx from(1.0, 0.0), to(-1.0, 0.5);
    const VectorC l = ode::along(inv, ode::Segment{from, to}, l0);
    CHECK(std::abs(l[0] - std::log(to)) < 1e-10);
}

TEST_CASE("ode: blow-up is a numerical failure", "[ode]")
{
    const ode::Rhs f = [](double, const VectorC& y, VectorC& dy) { dy = y.cwiseProduct(y); };
    VectorC y0(1);
    y0 << 1.0;
    CHECK_THROWS_AS(ode::integrate(f, 0.0, 2.0, y0), NumericalFailure);
}

TEST_CASE("quadrature: smooth, singular and kinked integrands", "[quad]")
{
    auto sin_cos = [](double x) {
        VectorR v(2);
        v << std::sin(x), std::cos(x) * std::cos(x);
        return v;
    };
    const auto r = quad::integrate(sin_cos, 0.0, kPi, {}, 1e-13);
    REQUIRE(r.converged);
    CHECK(std::abs(r.value[0] - 2.0) < 1e-12);
    CHECK(std::abs(r.value[1] - kPi / 2) < 1e-12);

    const auto s = quad::integrate([](double x) { return VectorR::Constant(1, std::sqrt(x)); }, 0.0, 1.0, {}, 1e-12);
    CHECK(std::abs(s.value[0] - 2.0 / 3.0) < 1e-11);

    const std::vector<double> kink{0.3};
    const auto k = quad::integrate([](double x) { return VectorR::Constant(1, std::abs(x - 0.3)); }, 0.0, 1.0, kink,
                                   1e-14);
    CHECK(std::abs(k.value[0] - (0.045 + 0.245)) < 1e-14);
    CHECK(k.evaluations <= 2 * 15 + 1);
}

// y0' = 0, y1' = y1 + b y0 / z has the canonical solution y1 = -b e^z E1(z),
// with asymptotic coefficients -b (-1)^{p-1} (p-1)!.
TEST_CASE("sectorial: exponential-integral oracle", "[sectorial]")
{
    const cplx b(0.4, -0.3);
    sectorial::Problem p;
    p.lambda = VectorC(2);
    p.lambda << 0.0, 1.0;
    p.residue = sectorial::SparseC(2, 2);
    p.residue.insert(1, 0) = b;
    p.unit = VectorC(2);
    p.unit << 1.0, 0.0;
    const sectorial::Solver solver(p, sectorial::Options{});

    const auto& c = solver.coefficients();
    double fact = 1.0;
    for (int q = 1; q <= 6; ++q) {
        CHECK(std::abs(c[q][1] - (-b * std::pow(-1.0, q - 1) * fact)) < 1e-12 * fact);
        fact *= q;
    }

    auto e1 = [](cplx z) {
        // E1(z) = e^{-z} int_0^inf e^{-z s} / (1 + s) ds for Re z > 0
        auto f = [z](double s) {
            const cplx v = std::exp(-z * s) / (1.0 + s);
            VectorR out(2);
            out << v.real(), v.imag();
            return out;
        };
        const auto r = quad::integrate(f, 0.0, 80.0, {}, 1e-15);
        return std::exp(-z) * cplx(r.value[0], r.value[1]);
    };
    for (auto [sector, arg] : {std::pair{1, kPi / 4}, std::pair{-1, -kPi / 4}, std::pair{1, kPi / 3}}) {
        const cplx z = std::polar(1.2, arg);
        const VectorC y = solver.evaluate(sector, 1.2, arg);
        CHECK(std::abs(y[0] - 1.0) < 1e-10);
        CHECK(std::abs(y[1] - (-b * std::exp(z) * e1(z))) < 1e-9);
    }
}
