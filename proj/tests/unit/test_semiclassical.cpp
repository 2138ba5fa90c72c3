#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "isokz/semiclassical.hpp"

using namespace isokz;
using namespace isokz::semiclassical;

namespace {

VectorR vec(std::initializer_list<double> xs)
{
    VectorR v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v[k++] = x;
    return v;
}

isomonodromy::CartanPath line(const VectorR& a, const VectorR& b) { return isomonodromy::CartanPath{{a, b}}; }

MatrixC random_matrix(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> d(-1, 1);
    MatrixC m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(d(rng), d(rng));
    return m;
}

MatrixC random_skew(std::mt19937_64& rng, int n, double frob)
{
    MatrixC m = random_matrix(rng, n);
    m = m - m.transpose().eval();
    return m * (frob / m.norm());
}

} // namespace

TEST_CASE("scl: the Casimir becomes the identity function", "[scl]")
{
    std::mt19937_64 rng(1);
    for (int n : {2, 3}) {
        const auto omega = uea::casimir(n, 1, 2);
        const SclFunction f = scl(uea::hbar_shift(omega, 1));
        CHECK(f.arity() == 1);
        CHECK_FALSE(f.lossy());
        const MatrixC v0 = random_matrix(rng, n);
        // sum_ij E_ij (V0)_ij in the defining representation is V0 itself
        CHECK((evaluate_matrix(f, v0) - v0).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(primitivity_residual(f) == 0.0);
    }
}

TEST_CASE("scl: inadmissible input is rejected", "[scl]")
{
    const auto omega = uea::casimir(2, 1, 2);
    CHECK_THROWS_AS(scl(omega), InvalidInput);
    CHECK_THROWS_AS(scl(uea::TruncatedElement::one(uea::Shape{2, 1, 1, 2})), InvalidInput);
}

TEST_CASE("scl: multiplicative on admissible elements", "[scl]")
{
    const uea::Shape shape{2, 2, 2, 4};
    const auto path = line(vec({1.0, -1.0}), vec({1.2, -0.9}));
    const auto a = uea::hbar_shift(quantum::iso_casimir_along(path, shape, {}), 1);
    const auto b = uea::exp_series(a);
    CHECK(uea::admissibility_check(b, 1));
    const auto lhs = scl(a * b);
    const auto rhs = scl(a) * scl(b);
    CHECK((lhs - rhs).max_abs() < 1e-13);
    CHECK(lhs.max_abs() > 0.1);
}

TEST_CASE("scl: primitivity and its control", "[scl]")
{
    const uea::Shape shape{3, 2, 2, 3};
    const auto path = line(vec({2.0, 0.0, -1.0}), vec({2.2, 0.1, -1.1}));
    const auto omega = quantum::iso_casimir_along(path, shape, {});
    CHECK(primitivity_residual(scl(uea::hbar_shift(omega, 1))) == 0.0);
    CHECK(primitivity_residual(scl(uea::hbar_shift(omega * omega, 2))) > 0.5);
    // exp of a primitive element is grouplike up to the truncation
    const auto g = scl(uea::exp_series(uea::hbar_shift(omega, 1)));
    CHECK(grouplike_residual(g) < 1e-12);
    CHECK(grouplike_residual(scl(uea::hbar_shift(omega, 1))) > 0.5);
}

TEST_CASE("scaling: exact power laws and the degenerate case", "[scl]")
{
    const auto s = make_scaling({1.0, 0.5, 0.25}, {2.0, 0.25, 0.03125});
    CHECK(std::abs(s.exponent - 3.0) < 1e-14);
    CHECK(std::isnan(make_scaling({1.0, 0.5}, {0.0, 0.0}).exponent));
    CHECK_THROWS_AS(make_scaling({1.0}, {1.0}), InvalidInput);
}

TEST_CASE("semiclassical bridge: Omega(u) and H against the classical flow", "[scl]")
{
    std::mt19937_64 rng(23);
    // n = 3: the classical V(u) moves and the mismatch scales like t^3
    const uea::Shape s3{3, 2, 2, 3};
    const auto path3 = line(vec({2.0, 0.0, -1.0}), vec({2.2, 0.1, -1.1}));
    const auto c3 = scl_casimir_check(path3, random_skew(rng, 3, 0.1), s3);
    CHECK(c3.scaling.exponent > 2.7);
    CHECK(c3.scaling.exponent < 3.3);

    // n = 2: the H-level mismatch scales like t^3 at every sample
    const uea::Shape s2{2, 2, 2, 3};
    const auto path2 = line(vec({1.0, -1.0}), vec({1.2, -0.9}));
    const auto rows = scl_solution_check(path2, random_skew(rng, 2, 0.1), {cplx(0.5, 1.0), cplx(-1.0, 0.6)}, s2);
    REQUIRE(rows.size() >= 2);
    for (const auto& r : rows) {
        CHECK(r.scaling.exponent > 2.7);
        CHECK(r.scaling.exponent < 3.3);
    }
}

TEST_CASE("conjecture probe: order zero is the classical skew identity", "[scl]")
{
    std::mt19937_64 rng(29);
    const uea::Shape s2{2, 2, 2, 3};
    const auto path2 = line(vec({1.0, -1.0}), vec({1.2, -0.9}));
    const auto rows = givental_conjecture_probe(path2, random_skew(rng, 2, 0.1), {cplx(0.5, 1.0), cplx(0.2, 0.3)}, s2);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        REQUIRE(r.residual.size() == 3);
        CHECK(r.residual[0] < 1e-8);
    }
    MatrixC not_skew = MatrixC::Identity(2, 2) * 0.1;
    CHECK_THROWS_AS(givental_conjecture_probe(path2, not_skew, {cplx(0.5, 1.0)}, s2), InvalidInput);
}
