#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "isokz/uea.hpp"

using namespace isokz;
using namespace isokz::uea;

namespace {

// Free-algebra oracle: an element is a map from arbitrary words to integers.
// It always resolves the rightmost descent, the opposite of the library.
std::map<Word, long long> naive_straighten(int n, std::map<Word, long long> x)
{
    for (;;) {
        bool changed = false;
        std::map<Word, long long> next;
        for (const auto& [w, c] : x) {
            int pos = -1;
            for (int k = static_cast<int>(w.size()) - 2; k >= 0; --k) {
                if (w[k] > w[k + 1]) {
                    pos = k;
                    break;
                }
            }
            if (pos < 0) {
                next[w] += c;
                continue;
            }
            changed = true;
            Word s = w;
            std::swap(s[pos], s[pos + 1]);
            next[s] += c;
            const Generator a = generator_of(n, w[pos]);
            const Generator b = generator_of(n, w[pos + 1]);
            auto put = [&](Generator g, long long sign) {
                Word r(w.begin(), w.begin() + pos);
                r.push_back(letter_of(n, g));
                r.insert(r.end(), w.begin() + pos + 2, w.end());
                next[r] += sign * c;
            };
            if (a.j == b.i) put({a.i, b.j}, 1);
            if (b.j == a.i) put({b.i, a.j}, -1);
        }
        std::erase_if(next, [](const auto& kv) { return kv.second == 0; });
        x = std::move(next);
        if (!changed) return x;
    }
}

MatrixC elementary(int n, int i, int j)
{
    MatrixC e = MatrixC::Zero(n, n);
    e(i - 1, j - 1) = 1.0;
    return e;
}

MatrixC kron(const MatrixC& a, const MatrixC& b)
{
    MatrixC out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
    return out;
}

TruncatedElement random_element(std::mt19937_64& rng, Shape s, int max_degree, int terms)
{
    std::uniform_int_distribution<int> letter(0, s.n * s.n - 1);
    std::uniform_int_distribution<int> deg(0, max_degree);
    std::uniform_int_distribution<int> order(0, s.hbar_order);
    std::normal_distribution<double> gauss;
    TruncatedElement out(s);
    for (int t = 0; t < terms; ++t) {
        TruncatedElement term = TruncatedElement::scalar(s, {gauss(rng), gauss(rng)}, order(rng));
        for (int slot = 0; slot < s.arity; ++slot) {
            const int d = deg(rng);
            for (int k = 0; k < d; ++k) {
                const Generator g = generator_of(s.n, static_cast<Letter>(letter(rng)));
                term = term * TruncatedElement::generator(s, slot, g.i, g.j);
            }
        }
        out += term;
    }
    return out;
}

double max_diff(const TruncatedElement& a, const TruncatedElement& b)
{
    return (a - b).max_abs();
}

double max_diff(const HbarMatrix& a, const HbarMatrix& b)
{
    double r = 0.0;
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) r = std::max(r, (a.coeffs[k] - b.coeffs[k]).cwiseAbs().maxCoeff());
    return r;
}

std::vector<Word> all_words(int n, int max_len)
{
    std::vector<Word> out{{}};
    std::vector<Word> frontier{{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Word> next;
        for (const auto& w : frontier) {
            for (int a = 0; a < n * n; ++a) {
                Word v = w;
                v.push_back(static_cast<Letter>(a));
                next.push_back(v);
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return out;
}

TruncatedElement from_word(Shape s, const Word& w)
{
    TruncatedElement e = TruncatedElement::one(s);
    for (Letter a : w) {
        const Generator g = generator_of(s.n, a);
        e = e * TruncatedElement::generator(s, 0, g.i, g.j);
    }
    return e;
}

} // namespace

TEST_CASE("letter order is column-major", "[uea]")
{
    CHECK(letter_of(2, {1, 1}) < letter_of(2, {2, 1}));
    CHECK(letter_of(2, {2, 1}) < letter_of(2, {1, 2}));
    CHECK(letter_of(2, {1, 2}) < letter_of(2, {2, 2}));
    for (int a = 0; a < 9; ++a) CHECK(letter_of(3, generator_of(3, static_cast<Letter>(a))) == a);
    CHECK_THROWS_AS(letter_of(2, {3, 1}), InvalidInput);
}

TEST_CASE("unit law and defining commutator", "[uea]")
{
    const Shape s{2, 1, 2, 3};
    std::mt19937_64 rng(7);
    const auto a = random_element(rng, s, 2, 6);
    CHECK(max_diff(TruncatedElement::one(s) * a, a) == 0.0);
    CHECK(max_diff(a * TruncatedElement::one(s), a) == 0.0);

    const auto e12 = TruncatedElement::generator(s, 0, 1, 2);
    const auto e21 = TruncatedElement::generator(s, 0, 2, 1);
    const auto expected = TruncatedElement::generator(s, 0, 1, 1) - TruncatedElement::generator(s, 0, 2, 2);
    CHECK(max_diff(commutator(e12, e21), expected) == 0.0);
}

TEST_CASE("straightening agrees with the free-algebra oracle", "[uea]")
{
    for (int n : {2, 3}) {
        for (const auto& w : all_words(n, n == 2 ? 4 : 3)) {
            const auto& lib = straighten(n, w);
            const auto ref = naive_straighten(n, {{w, 1}});
            REQUIRE(lib == ref);
        }
    }
}

TEST_CASE("random products match the oracle", "[uea]")
{
    const Shape s{2, 1, 0, 8};
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> letter(0, 3);
    std::uniform_int_distribution<int> len(0, 2);
    for (int trial = 0; trial < 200; ++trial) {
        Word u, v;
        for (int k = len(rng); k > 0; --k) u.push_back(static_cast<Letter>(letter(rng)));
        for (int k = len(rng); k > 0; --k) v.push_back(static_cast<Letter>(letter(rng)));
        const auto prod = from_word(s, u) * from_word(s, v);
        Word uv = u;
        uv.insert(uv.end(), v.begin(), v.end());
        const auto ref = naive_straighten(2, {{uv, 1}});
        TruncatedElement expected(s);
        for (const auto& [w, c] : ref) expected.add_term({w}, 0, static_cast<double>(c));
        REQUIRE(max_diff(prod, expected) == 0.0);
    }
}

TEST_CASE("associativity on all degree <= 2 monomials", "[uea]")
{
    const Shape s{2, 1, 0, 6};
    std::vector<TruncatedElement> basis;
    for (const auto& w : all_words(2, 2)) {
        if (std::is_sorted(w.begin(), w.end())) basis.push_back(from_word(s, w));
    }
    for (const auto& a : basis) {
        for (const auto& b : basis) {
            const auto ab = a * b;
            for (const auto& c : basis) REQUIRE(max_diff(ab * c, a * (b * c)) == 0.0);
        }
    }
}

TEST_CASE("degree-one brackets are antisymmetric and satisfy Jacobi", "[uea]")
{
    const Shape s{3, 1, 0, 3};
    std::vector<TruncatedElement> gens;
    for (int i = 1; i <= 3; ++i) {
        for (int j = 1; j <= 3; ++j) gens.push_back(TruncatedElement::generator(s, 0, i, j));
    }
    for (const auto& x : gens) {
        for (const auto& y : gens) {
            REQUIRE((commutator(x, y) + commutator(y, x)).is_zero());
            for (const auto& z : gens) {
                const auto j = commutator(x, commutator(y, z)) + commutator(y, commutator(z, x)) +
                               commutator(z, commutator(x, y));
                REQUIRE(j.is_zero());
            }
        }
    }
}

TEST_CASE("degree cap marks elements lossy", "[uea]")
{
    const Shape s{2, 1, 1, 1};
    const auto e12 = TruncatedElement::generator(s, 0, 1, 2);
    const auto e21 = TruncatedElement::generator(s, 0, 2, 1);
    const auto p = e12 * e21;
    CHECK(p.lossy());
    CHECK_FALSE(e12.lossy());
    CHECK((p + e12).lossy());
    // hbar truncation alone is a quotient and never marks loss.
    const auto h = TruncatedElement::scalar(s, 1.0, 1);
    CHECK((h * h).is_zero());
    CHECK_FALSE((h * h).lossy());
    CHECK_THROWS_AS(e12 * TruncatedElement::one(Shape{2, 1, 2, 1}), InvalidInput);
}

TEST_CASE("Casimir elements", "[uea]")
{
    const auto w1 = casimir(1, 2, 3);
    REQUIRE(w1.terms().size() == 1);
    CHECK(w1.coeff({{0}, {0}}, 0) == cplx(1.0));
    CHECK(max_diff(w1, cartan_casimir(1, 2, 3)) == 0.0);

    const auto w2 = casimir(2, 2, 3);
    CHECK(w2.terms().size() == 4);
    const Shape s{2, 2, 2, 3};
    TruncatedElement expected(s);
    for (auto [i, j] : {std::pair{1, 1}, {2, 2}, {1, 2}, {2, 1}}) {
        expected += TruncatedElement::generator(s, 0, i, j) * TruncatedElement::generator(s, 1, j, i);
    }
    CHECK(max_diff(w2, expected) == 0.0);

    MatrixC kr = MatrixC::Zero(4, 4);
    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 2; ++j) kr += kron(elementary(2, i, j), elementary(2, j, i));
    }
    const auto rep = evaluation_rep(w2);
    CHECK((rep.coeffs[0] - kr).norm() == 0.0);
    CHECK(rep.coeffs[1].norm() == 0.0);

    const auto rep0 = evaluation_rep(cartan_casimir(2, 2, 3)).coeffs[0];
    MatrixC d = MatrixC::Zero(4, 4);
    d(0, 0) = 1.0;
    d(3, 3) = 1.0;
    CHECK((rep0 - d).norm() == 0.0);
}

TEST_CASE("kappa", "[uea]")
{
    const auto k12 = kappa(2, 1, 2, 2, 3);
    const Shape s = k12.shape();
    const auto expected = 2.0 * (TruncatedElement::generator(s, 0, 2, 1) * TruncatedElement::generator(s, 0, 1, 2)) +
                          TruncatedElement::generator(s, 0, 1, 1) - TruncatedElement::generator(s, 0, 2, 2);
    CHECK(max_diff(k12, expected) == 0.0);
    // 2 E21E12 is already in normal order, so it is a single stored monomial.
    CHECK(k12.coeff({{letter_of(2, {2, 1}), letter_of(2, {1, 2})}}, 0) == cplx(2.0));
    CHECK(max_diff(k12, kappa(2, 2, 1, 2, 3)) == 0.0);
    const MatrixC m = elementary(2, 1, 2) * elementary(2, 2, 1) + elementary(2, 2, 1) * elementary(2, 1, 2);
    CHECK((evaluation_rep(k12).coeffs[0] - m).norm() == 0.0);
    CHECK((m - MatrixC::Identity(2, 2)).norm() == 0.0);
    CHECK_THROWS_AS(kappa(2, 1, 1, 2, 3), InvalidInput);
}

TEST_CASE("coproduct is an algebra map", "[uea]")
{
    const Shape s{2, 1, 1, 4};
    const auto e12 = TruncatedElement::generator(s, 0, 1, 2);
    const auto e21 = TruncatedElement::generator(s, 0, 2, 1);
    const Shape s2{2, 2, 1, 4};
    CHECK(max_diff(coproduct(e12, 0),
                   TruncatedElement::generator(s2, 0, 1, 2) + TruncatedElement::generator(s2, 1, 1, 2)) == 0.0);
    CHECK(max_diff(coproduct(TruncatedElement::one(s), 0), TruncatedElement::one(s2)) == 0.0);
    CHECK(max_diff(coproduct(e12 * e21, 0), coproduct(e12, 0) * coproduct(e21, 0)) == 0.0);

    std::mt19937_64 rng(3);
    const Shape s3{3, 2, 1, 4};
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_element(rng, s3, 2, 3);
        const auto b = random_element(rng, s3, 2, 3);
        for (int slot : {0, 1}) {
            REQUIRE(max_diff(coproduct(a * b, slot), coproduct(a, slot) * coproduct(b, slot)) < 1e-12);
        }
    }
}

TEST_CASE("evaluation representation is multiplicative", "[uea]")
{
    std::mt19937_64 rng(5);
    for (const Shape s : {Shape{2, 1, 2, 6}, Shape{2, 2, 2, 6}, Shape{3, 2, 1, 6}}) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto a = random_element(rng, s, 2, 4);
            const auto b = random_element(rng, s, 2, 4);
            REQUIRE(max_diff(evaluation_rep(a * b), evaluation_rep(a) * evaluation_rep(b)) < 1e-11);
        }
    }
    const Shape s{2, 2, 0, 3};
    const auto x = TruncatedElement::generator(s, 0, 1, 2) * TruncatedElement::generator(s, 1, 2, 1);
    CHECK((evaluation_rep(x).coeffs[0] - kron(elementary(2, 1, 2), elementary(2, 2, 1))).norm() == 0.0);
    CHECK((evaluation_rep(TruncatedElement::one(s)).coeffs[0] - MatrixC::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("exp, log, invert and conjugation", "[uea]")
{
    const Shape s{2, 1, 3, 4};
    const auto e12 = TruncatedElement::generator(s, 0, 1, 2);
    CHECK(max_diff(exp_series(TruncatedElement::zero(s)), TruncatedElement::one(s)) == 0.0);
    const auto prod = exp_series(hbar_shift(e12, 1)) * exp_series(hbar_shift(-e12, 1));
    CHECK(max_diff(prod, TruncatedElement::one(s)) < 1e-15);

    const auto w = casimir(2, 2, 3);
    CHECK(max_diff(conjugate(TruncatedElement::one(w.shape()), w), w) == 0.0);

    std::mt19937_64 rng(9);
    const Shape s2{2, 2, 2, 6};
    for (int trial = 0; trial < 5; ++trial) {
        auto x = hbar_shift(random_element(rng, s2, 1, 4), 1);
        x.canonicalize();
        REQUIRE(max_diff(log_series(exp_series(x)), x) < 1e-12);
        const auto t = exp_series(x);
        REQUIRE(max_diff(invert(t) * t, TruncatedElement::one(s2)) < 1e-12);
        const auto a = random_element(rng, s2, 1, 4);
        REQUIRE(max_diff(adjoint_exp(x, a), conjugate(t, a)) < 1e-11);
    }
    CHECK_THROWS_AS(exp_series(e12), InvalidInput);
    CHECK_THROWS_AS(log_series(e12), InvalidInput);
    CHECK_THROWS_AS(invert(e12), InvalidInput);
}

TEST_CASE("filtration check", "[uea]")
{
    const FiltrationProfile o({0, 2, 4});
    const Shape s{2, 2, 2, 3};
    CHECK(filtration_check(TruncatedElement::one(s), o));
    CHECK(filtration_check(hbar_shift(casimir(2, 2, 3), 1), o));
    CHECK_FALSE(filtration_check(casimir(2, 2, 3), o));
    const auto cubic = TruncatedElement::generator(s, 0, 1, 2) * TruncatedElement::generator(s, 0, 2, 1) *
                       TruncatedElement::generator(s, 1, 1, 1);
    CHECK_FALSE(filtration_check(hbar_shift(cubic, 1), o));
    CHECK_THROWS_AS(FiltrationProfile({0, 1}), InvalidInput);
    CHECK_THROWS_AS(FiltrationProfile({0, 2, 3}), InvalidInput);
}

TEST_CASE("admissibility in the second slot", "[uea]")
{
    const auto w = casimir(2, 2, 3);
    CHECK(admissibility_check(hbar_shift(w, 1), 1));
    CHECK_FALSE(admissibility_check(w, 1));
    const auto bad = find_inadmissible(w, 1);
    REQUIRE(bad.has_value());
    CHECK(bad->second == 0);

    // Conjugating by exp(E), with the hbar^k part of E of slot-2 degree <= k + 1,
    // keeps admissible elements admissible.
    std::mt19937_64 rng(21);
    std::normal_distribution<double> gauss;
    const Shape s{2, 2, 2, 4};
    const auto k12 = kappa(2, 1, 2, 2, 4);
    const auto k1 = embed_slot(k12, 0, 2);
    const auto k2 = embed_slot(k12, 1, 2);
    for (int trial = 0; trial < 5; ++trial) {
        auto e = hbar_shift(cplx(gauss(rng)) * (k1 + k2), 1) + hbar_shift(cplx(gauss(rng)) * casimir(2, 2, 4), 1);
        const auto t = exp_series(e);
        TruncatedElement x(s);
        for (int k = 0; k <= 2; ++k) {
            auto part = random_element(rng, Shape{2, 2, 0, 4}, 1, 2);
            for (const auto& [m, p] : part.terms()) {
                if (static_cast<int>(m[1].size()) <= k) x.add_term(m, k, p[0]);
            }
        }
        REQUIRE(admissibility_check(x, 1));
        const auto y = adjoint_exp(e, x);
        REQUIRE(admissibility_check(y, 1));
        REQUIRE(max_diff(y, conjugate(t, x)) < 1e-11);
    }
}

TEST_CASE("slot embedding and hbar rescaling", "[uea]")
{
    const auto w = casimir(2, 1, 3);
    const std::vector<int> map13{0, 2};
    const auto w13 = embed_slots(w, map13, 3);
    CHECK(w13.arity() == 3);
    CHECK(w13.coeff({{letter_of(2, {1, 2})}, {}, {letter_of(2, {2, 1})}}, 0) == cplx(1.0));
    const auto r = rescale_hbar(hbar_shift(w, 1), 2.0);
    CHECK(r.max_abs(1) == 2.0);
}
