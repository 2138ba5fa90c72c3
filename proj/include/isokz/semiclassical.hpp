#pragma once

// Semiclassical limit of admissible elements: the hbar^k terms whose slot-2
// degree equals k survive, their slot-2 words read as commutative monomials,
// i.e. polynomial functions on gl_n^* with values in U(gl_n)^{(x) arity}.
// A generator E_ij in the commutative slot is the coordinate V -> tr(E_ij V) = V_ji.

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "isokz/classical_isomonodromy.hpp"
#include "isokz/classical_stokes.hpp"
#include "isokz/quantum_connection.hpp"
#include "isokz/uea.hpp"

namespace isokz::semiclassical {

using uea::Monomial;
using uea::TruncatedElement;
using uea::Word;

class SclFunction {
public:
    // (PBW monomial of the U(gl_n) slots, sorted commutative word)
    using Key = std::pair<Monomial, Word>;

    SclFunction() = default;
    SclFunction(int n, int arity, int degree_cap, int symmetric_cap);

    int n() const { return n_; }
    int arity() const { return arity_; }
    int degree_cap() const { return degree_cap_; }
    int symmetric_cap() const { return symmetric_cap_; }
    const std::map<Key, cplx>& terms() const { return terms_; }
    bool lossy() const { return lossy_; }

    // Symmetric degree above the cap is a consistent truncation; PBW degree
    // above the cap marks the result lossy.
    void add_term(const Monomial& m, Word sym, cplx c);
    void mark_lossy() { lossy_ = true; }
    cplx coeff(const Monomial& m, const Word& sym) const;
    double max_abs() const;

    SclFunction& operator+=(const SclFunction& o);
    SclFunction& operator-=(const SclFunction& o);

private:
    int n_ = 2;
    int arity_ = 1;
    int degree_cap_ = 3;
    int symmetric_cap_ = 2;
    std::map<Key, cplx> terms_;
    bool lossy_ = false;
};

SclFunction operator+(SclFunction a, const SclFunction& b);
SclFunction operator-(SclFunction a, const SclFunction& b);
SclFunction operator*(cplx c, SclFunction a);
SclFunction operator*(const SclFunction& a, const SclFunction& b);

// scl of an arity-2 element with the commutative slot 1 (0-based); the
// symmetric cap is the hbar order of `a`. Throws InvalidInput naming the
// first term of slot degree above its hbar power.
SclFunction scl(const TruncatedElement& a, int slot = 1);

// Slot s of `f` goes to slot mapping[s] of an arity-`total` function.
SclFunction embed_slots(const SclFunction& f, std::span<const int> mapping, int total);
// Delta applied to U(gl_n) slot `slot`.
SclFunction coproduct(const SclFunction& f, int slot);

// Substitutes V0 into the commutative slot.
TruncatedElement evaluate(const SclFunction& f, const MatrixC& v0);
// Same, followed by the defining representation.
MatrixC evaluate_matrix(const SclFunction& f, const MatrixC& v0);

// max |(Delta (x) 1) f - f^13 - f^23|
double primitivity_residual(const SclFunction& f);
// max |(Delta (x) 1) f - f^13 f^23|
double grouplike_residual(const SclFunction& f);

// Mismatch at scales t of V0 and the least-squares slope of log err vs log t
// (NaN when some error is exactly zero).
struct Scaling {
    std::vector<double> scales;
    std::vector<double> errors;
    double exponent = 0.0;
};

Scaling make_scaling(std::vector<double> scales, std::vector<double> errors);

// evaluate(scl(hbar Omega(u)), t V0) against the classical V(u) with V(u_0) = t V0.
struct CasimirCheck {
    Scaling scaling;
    MatrixC quantum;    // at the first scale
    MatrixC classical;  // at the first scale
};
CasimirCheck scl_casimir_check(const isomonodromy::CartanPath& path, const MatrixC& v0, const uea::Shape& shape,
                               const std::vector<double>& scales = {1.0, 0.5},
                               const quantum::MagnusOptions& magnus = {},
                               const isomonodromy::FlowOptions& flow = {});

// evaluate(scl(H_hbar_pm(z, u)), t V0) against the classical H_pm(z) of (U, V(u; t V0)).
struct SolutionRow {
    cplx z;
    int sector = 1;
    Scaling scaling;
};
std::vector<SolutionRow> scl_solution_check(const isomonodromy::CartanPath& path, const MatrixC& v0,
                                            const std::vector<cplx>& z_samples, const uea::Shape& shape,
                                            const std::vector<double>& scales = {1.0, 0.5},
                                            const quantum::QuantumOptions& qopt = {},
                                            const classical::Options& copt = {});

// Probe of H(-z)^* H(z) = 1: a term hbar^k with slot-2 word of length d
// is assigned quantum order k - d and its slot-2 word is read as a
// commutative monomial; products are truncated at k <= N and evaluated at a
// skew V0. Order 0 reproduces the classical identity H_-(-z)^T H_+(z) = I.
struct ProbeRow {
    cplx z;
    std::vector<double> residual;  // per quantum order
};
std::vector<ProbeRow> givental_conjecture_probe(const isomonodromy::CartanPath& path, const MatrixC& v0,
                                                const std::vector<cplx>& z_samples, const uea::Shape& shape,
                                                const quantum::QuantumOptions& qopt = {});

} // namespace isokz::semiclassical
