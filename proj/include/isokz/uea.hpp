#pragma once

// Truncated tensor powers of U(gl_n) over C[hbar]/(hbar^{N+1}).
//
// Elements are stored in a PBW basis: every slot carries a weakly increasing
// word of generator letters. Letters are ordered column-major, i.e. E_ij has
// index (j-1)*n + (i-1), so for n = 2 the order is E11 < E21 < E12 < E22.
// Products are straightened with [E_ij, E_kl] = d_jk E_il - d_li E_kj.
//
// Two truncations are applied to every result: hbar powers above N are
// dropped (a quotient ring, always consistent), and monomials whose degree in
// some slot exceeds the cap D are dropped. The latter is not an ideal of
// U(gl_n), so any element that lost a nonzero term is marked lossy and the
// mark propagates through every operation that consumes it.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isokz/common.hpp"

namespace isokz::uea {

using Letter = std::uint8_t;
using Word = std::vector<Letter>;
using Monomial = std::vector<Word>;
using HbarPoly = std::vector<cplx>;

struct Generator {
    int i = 1;
    int j = 1;

    friend bool operator==(const Generator&, const Generator&) = default;
};

Letter letter_of(int n, Generator g);
Generator generator_of(int n, Letter a);

struct Shape {
    int n = 2;
    int arity = 1;
    int hbar_order = 2;
    int degree_cap = 3;

    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string describe(const Shape& s);

class TruncatedElement {
public:
    using TermMap = std::map<Monomial, HbarPoly>;

    TruncatedElement() = default;
    explicit TruncatedElement(Shape shape);

    static TruncatedElement zero(Shape shape);
    static TruncatedElement one(Shape shape);
    static TruncatedElement scalar(Shape shape, cplx c, int hbar_power = 0);
    // E_ij placed in `slot` (0-based), all other slots empty.
    static TruncatedElement generator(Shape shape, int slot, int i, int j);

    const Shape& shape() const { return shape_; }
    int n() const { return shape_.n; }
    int arity() const { return shape_.arity; }
    int hbar_order() const { return shape_.hbar_order; }
    int degree_cap() const { return shape_.degree_cap; }
    const TermMap& terms() const { return terms_; }
    bool lossy() const { return lossy_; }
    bool is_zero() const { return terms_.empty(); }

    // Coefficient of `m` at hbar^k; zero if absent.
    cplx coeff(const Monomial& m, int k) const;

    // Accumulate c * hbar^k * m. Words must already be normal-ordered.
    // Over-cap monomials and hbar^{>N} are dropped (the former marks lossy).
    void add_term(const Monomial& m, int k, cplx c);
    void add_term(const Monomial& m, const HbarPoly& p);
    void mark_lossy() { lossy_ = true; }

    // Removes exact zeros and (optionally) coefficients below `threshold`.
    void canonicalize(double threshold = 0.0);

    // hbar^k coefficient as an element with no hbar dependence.
    TruncatedElement hbar_part(int k) const;
    // Largest |coefficient| over all terms and orders.
    double max_abs() const;
    // Largest |coefficient| at a given hbar order.
    double max_abs(int k) const;

    TruncatedElement& operator+=(const TruncatedElement& o);
    TruncatedElement& operator-=(const TruncatedElement& o);
    TruncatedElement& operator*=(cplx c);

private:
    Shape shape_{};
    TermMap terms_;
    bool lossy_ = false;
};

TruncatedElement operator+(TruncatedElement a, const TruncatedElement& b);
TruncatedElement operator-(TruncatedElement a, const TruncatedElement& b);
TruncatedElement operator-(TruncatedElement a);
TruncatedElement operator*(cplx c, TruncatedElement a);
TruncatedElement operator*(const TruncatedElement& a, const TruncatedElement& b);

// Multiplication by hbar^k (shifts orders up, drops what passes N).
TruncatedElement hbar_shift(const TruncatedElement& a, int k);
// Replace hbar by c * hbar: the order-k coefficient is scaled by c^k.
TruncatedElement rescale_hbar(const TruncatedElement& a, cplx c);
// Same algebra data re-homed into a shape with different N or D.
TruncatedElement reshape(const TruncatedElement& a, int hbar_order, int degree_cap);

// Normal-ordered expansion of an arbitrary word in U(gl_n), exact integer
// coefficients. Memoized per thread.
const std::map<Word, long long>& straighten(int n, const Word& w);

TruncatedElement normal_order_product(const TruncatedElement& a, const TruncatedElement& b);
TruncatedElement commutator(const TruncatedElement& a, const TruncatedElement& b);

// Omega = sum_ij E_ij (x) E_ji, trace-form Casimir of gl_n.
TruncatedElement casimir(int n, int hbar_order, int degree_cap);
// Omega_0 = sum_i E_ii (x) E_ii.
TruncatedElement cartan_casimir(int n, int hbar_order, int degree_cap);
// K_ij = E_ij E_ji + E_ji E_ij (arity 1), i != j.
TruncatedElement kappa(int n, int i, int j, int hbar_order, int degree_cap);
// E_ij (x) E_ji + E_ji (x) E_ij (arity 2), i != j.
TruncatedElement root_pair_casimir(int n, int i, int j, int hbar_order, int degree_cap);

// Places slot s of `a` into slot mapping[s] of an element of arity `total`.
TruncatedElement embed_slots(const TruncatedElement& a, std::span<const int> mapping, int total);
// Contiguous placement starting at `position`.
TruncatedElement embed_slot(const TruncatedElement& a, int position, int total);

// Delta applied to slot `slot`: the slot is replaced by two adjacent slots.
// Degree never grows, so the only overflow is the arity itself (never lossy).
TruncatedElement coproduct(const TruncatedElement& a, int slot);

// ad(u^{(slot)}) with u = diag(u_1..u_n); diagonal in the PBW basis.
double weight(int n, const Word& w, std::span<const double> u);
TruncatedElement ad_cartan(const TruncatedElement& a, std::span<const double> u, int slot);
// exp(c * ad u^{(slot)}) applied to a, i.e. coefficient times exp(c * weight).
TruncatedElement exp_ad_cartan(const TruncatedElement& a, std::span<const double> u, int slot, cplx c);

// exp(a), a = 0 mod hbar.
TruncatedElement exp_series(const TruncatedElement& a);
// log(a), a = 1 + O(hbar).
TruncatedElement log_series(const TruncatedElement& a);
// a^{-1} for a whose hbar^0 part is a nonzero scalar.
TruncatedElement invert(const TruncatedElement& a);
// t^{-1} a t.
TruncatedElement conjugate(const TruncatedElement& t, const TruncatedElement& a);
// exp(-E) a exp(E) through nested commutators, E = 0 mod hbar.
TruncatedElement adjoint_exp(const TruncatedElement& e, const TruncatedElement& a);

class FiltrationProfile {
public:
    explicit FiltrationProfile(std::vector<int> orders);
    // o_k = k + 1 for k >= 1, o_0 = 0: the bound obeyed by log of the gauge
    // transform. It is a degree bound for Lie-type elements, not closed under
    // products (o_1 + o_1 > o_2), so it skips the subadditivity validation.
    static FiltrationProfile magnus(int hbar_order);
    int at(int k) const;
    const std::vector<int>& orders() const { return orders_; }

private:
    struct Unchecked {};
    FiltrationProfile(std::vector<int> orders, Unchecked) : orders_(std::move(orders)) {}
    std::vector<int> orders_;
};

int total_degree(const Monomial& m);
bool filtration_check(const TruncatedElement& a, const FiltrationProfile& o);

// First term violating "slot degree <= hbar power", if any.
std::optional<std::pair<Monomial, int>> find_inadmissible(const TruncatedElement& a, int slot);
bool admissibility_check(const TruncatedElement& a, int slot);

// Matrices over C[hbar]/(hbar^{N+1}); entry k is the hbar^k coefficient.
struct HbarMatrix {
    std::vector<MatrixC> coeffs;

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
    Eigen::Index dim() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
    MatrixC evaluate(cplx hbar) const;
};

HbarMatrix operator*(const HbarMatrix& a, const HbarMatrix& b);
HbarMatrix operator-(const HbarMatrix& a, const HbarMatrix& b);

// Defining representation on (C^n)^{(x) arity}; slot 0 is the leftmost factor.
HbarMatrix evaluation_rep(const TruncatedElement& a);

std::string to_string(const TruncatedElement& a);

} // namespace isokz::uea
