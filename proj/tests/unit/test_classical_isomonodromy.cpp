#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "isokz/classical_isomonodromy.hpp"

using namespace isokz;
using namespace isokz::isomonodromy;

namespace {

MatrixC random_skew(std::mt19937_64& rng, int n, double frob)
{
    std::uniform_real_distribution<double> d(-1, 1);
    MatrixC v = MatrixC::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            v(i, j) = cplx(d(rng), d(rng));
            v(j, i) = -v(i, j);
        }
    return v * (frob / v.norm());
}

VectorR vec(std::initializer_list<double> xs)
{
    VectorR v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v[k++] = x;
    return v;
}

CartanPath line(const VectorR& a, const VectorR& b) { return CartanPath{{a, b}}; }

double dist(const MatrixC& a, const MatrixC& b) { return (a - b).cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("isomonodromy: path geometry and validation", "[iso]")
{
    CartanPath p{{vec({1, 0, -1}), vec({1, 0.3, -1}), vec({1.4, 0.3, -1})}};
    CHECK(std::abs(p.length() - 0.7) < 1e-15);
    CHECK((p.at(0.5) - vec({1.2, 0.3, -1})).norm() < 1e-15);
    CHECK((p.at(9.0) - p.waypoints.back()).norm() == 0.0);
    const auto bp = p.breakpoints();
    REQUIRE(bp.size() == 3);
    CHECK(std::abs(bp[1] - 0.3) < 1e-15);
    CHECK_NOTHROW(validate(p));

    CHECK_THROWS_AS(validate(line(vec({1, 0, -1}), vec({-0.5, 0, -1}))), InvalidInput);  // crosses u_1 = u_2
    CHECK_THROWS_AS(validate(CartanPath{}), InvalidInput);
    CHECK_THROWS_AS(validate(line(vec({1, 0}), vec({1, 0, -1}))), InvalidInput);
}

TEST_CASE("isomonodromy: ad_U inverse and the compatibility identity", "[iso]")
{
    std::mt19937_64 rng(3);
    const VectorR u = vec({1.3, 0.2, -0.8});
    const MatrixC v = random_skew(rng, 3, 0.7);
    const MatrixC U = u.cast<cplx>().asDiagonal();
    const MatrixC w = ad_u_inverse(u, v);
    MatrixC off = v;
    off.diagonal().setZero();
    CHECK(dist(U * w - w * U, off) < 1e-15);
    for (int k = 0; k < 3; ++k) {
        MatrixC ekk = MatrixC::Zero(3, 3);
        ekk(k, k) = 1.0;
        const MatrixC lk = lambda_coefficient(u, v, k);
        CHECK(dist(U * lk - lk * U, ekk * v - v * ekk) < 1e-14);
    }
    // sum_k V_k = 0: translations along (1, ..., 1) are trivial
    MatrixC sum = MatrixC::Zero(3, 3);
    for (const auto& l : lambda_form(u, v)) sum += l;
    CHECK(sum.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("isomonodromy: exact symmetries of the flow", "[iso]")
{
    std::mt19937_64 rng(5);
    const MatrixC v0 = random_skew(rng, 3, 0.4);
    const VectorR u0 = vec({1.0, 0.0, -1.0});
    // translation and dilation of u leave V unchanged
    for (const VectorR& end : {VectorR(u0.array() + 0.4), VectorR(1.5 * u0)}) {
        const auto s = integrate_iso_flow(line(u0, end), v0, {line(u0, end).length()});
        CHECK(dist(s.back().V, v0) < 1e-10);
    }
    // n = 2 skew: V is fixed by its spectrum
    const MatrixC v2 = random_skew(rng, 2, 0.3);
    const auto s2 = integrate_iso_flow(line(vec({1, -1}), vec({1.4, -0.2})), v2, {0.2, 0.5});
    for (const auto& x : s2) CHECK(dist(x.V, v2) < 1e-10);
    // a generic direction genuinely moves V
    const auto s3 = integrate_iso_flow(line(u0, vec({1.2, -0.1, -1.3})), v0, {0.3});
    CHECK(dist(s3.back().V, v0) > 1e-3);
}

// dF/du_k = (z E_kk + V_k) F with F = H e^{zU} (skew V: [V] = 0), checked by
// central differences of sectorial solutions at u +- eps e_k.
TEST_CASE("isomonodromy: u-equation for canonical solutions", "[iso]")
{
    std::mt19937_64 rng(9);
    const MatrixC v0 = random_skew(rng, 3, 0.3);
    const VectorR u0 = vec({1.0, 0.0, -1.0});
    const double eps = 1e-4;
    const cplx z = std::polar(1.3, 0.9);
    auto h_at = [&](const VectorR& u) {
        const MatrixC v = u == u0 ? v0 : integrate_iso_flow(line(u0, u), v0, {eps}).back().V;
        const classical::SectorSolutions sol(classical::IrregularSystem{u.cast<cplx>(), v, true}, {});
        return sol.H(1, std::abs(z), std::arg(z));
    };
    const MatrixC h0 = h_at(u0);
    for (int k = 0; k < 3; ++k) {
        VectorR dir = VectorR::Zero(3);
        dir[k] = 1.0;
        const MatrixC dh = (h_at(u0 + eps * dir) - h_at(u0 - eps * dir)) / (2 * eps);
        MatrixC ekk = MatrixC::Zero(3, 3);
        ekk(k, k) = 1.0;
        const MatrixC lhs = dh + z * h0 * ekk;
        const MatrixC rhs = (z * ekk + lambda_coefficient(u0, v0, k)) * h0;
        CHECK(dist(lhs, rhs) < 1e-6);
    }
}

TEST_CASE("isomonodromy: Stokes drift, skewness and spectrum along the flow", "[iso]")
{
    std::mt19937_64 rng(13);
    const MatrixC v0 = random_skew(rng, 3, 0.3);
    const auto path = line(vec({1.0, 0.0, -1.0}), vec({1.3, -0.15, -1.3}));
    const auto rows = stokes_drift(path, v0, 4, FlowOptions{}, classical::Options{});
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(std::max(r.drift_plus, r.drift_minus) < 1e-9);
        CHECK(r.skewness < 1e-12);
        CHECK(r.spectrum < 1e-10);
    }
}

TEST_CASE("isomonodromy: zero curvature along the flow, and its control", "[iso]")
{
    std::mt19937_64 rng(17);
    const MatrixC v0 = random_skew(rng, 3, 0.3);
    const auto path = line(vec({1.0, 0.0, -1.0}), vec({1.2, 0.1, -1.2}));
    const std::vector<cplx> grid{cplx(0.5, 0.5), cplx(-1.0, 0.3), cplx(2.0, -1.0)};
    double flat = 0.0, control = 0.0;
    for (const auto& r : dubrovin_flat_sections(path, v0, grid, 3)) flat = std::max(flat, r.residual);
    for (const auto& r : dubrovin_flat_sections(path, v0, grid, 3, {}, true)) control = std::max(control, r.residual);
    CHECK(flat < 1e-7);
    CHECK(control > 1e-2);
}

TEST_CASE("isomonodromy: spectrum distance", "[iso]")
{
    MatrixC a = MatrixC::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -2.0;
    MatrixC b = a;
    b(0, 0) = 1.25;
    CHECK(std::abs(spectrum_distance(a, b) - 0.25) < 1e-14);
    CHECK(spectrum_distance(a, a) == 0.0);
}
