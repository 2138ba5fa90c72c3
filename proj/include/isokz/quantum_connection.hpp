#pragma once

// Isomonodromic KZ connection on A = U(gl_n)^{(x)2}[[hbar]] truncated at
// hbar^N and slot degree D:
//
//     d_z - (ad u^(1) + hbar Omega(u) / z) dz,    Omega(u) = T(u)^{-1} Omega T(u),
//
// where dT = hbar A T, A = sum_{i<j} d log(u_i - u_j) X_ij and
// X_ij = (K_ij^(1) + K_ij^(2)) / 2.
//
// Canonical solutions are normalized at the irregular point z = infinity:
// F_pm = H_pm z^{hbar Omega_0} e^{z ad u^(1)} with H_pm -> 1 in H_pm.
// Quantum Stokes matrices (log z with its cut on the negative real axis):
//   S_hbar_plus  = F_-^{-1} F_+  on the positive real axis,
//   S_hbar_minus = F_+^{-1} F_-  on the negative real axis, both with arg z = pi.
// The second one equals F_+^{-1} F_-^{cont} e^{2 pi i hbar Omega_0}, i.e. the
// paper's e^{hbar Omega_0} read with the 2 pi i of the classical e^{2 pi i [V]}.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isokz/classical_isomonodromy.hpp"
#include "isokz/sectorial.hpp"
#include "isokz/uea.hpp"

namespace isokz::quantum {

using uea::Shape;
using uea::TruncatedElement;
using isomonodromy::CartanPath;

// Positive pairs (i, j), i < j, 1-based, in lexicographic order.
std::vector<std::pair<int, int>> positive_pairs(int n);
// X_ij = (K_ij (x) 1 + 1 (x) K_ij) / 2 in an arity-2 shape.
TruncatedElement gauge_generator(const Shape& shape, int i, int j);

// Scalar data of the gauge form along a path: f_p(s) = alpha_p'(s) / alpha_p(s)
// with s the arclength; alpha_p = u_i - u_j.
class GaugeForm {
public:
    explicit GaugeForm(const CartanPath& path);

    int pair_count() const { return static_cast<int>(pairs_.size()); }
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
    double length() const { return length_; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    VectorR f(double s) const;
    // Same on a given segment (one-sided values at corners).
    VectorR f(double s, std::size_t segment) const;
    // int_0^L f_p ds = log(alpha_p(end) / alpha_p(start)).
    VectorR first_integrals() const;

private:
    CartanPath path_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<double> breaks_;
    double length_ = 0.0;
};

struct MagnusOptions {
    double tol = 1e-11;        // absolute tolerance of the outermost quadrature
    int max_intervals = 4000;
};

struct MagnusSolution {
    std::vector<TruncatedElement> E;  // E_1..E_m (hbar stripped)
    TruncatedElement log_T;           // sum hbar^k E_k
    double quadrature_error = 0.0;    // summed error estimates of the iterated integrals
    bool lossy = false;
};

// Magnus expansion through order min(m, N); m <= 3.
MagnusSolution magnus_terms(const CartanPath& path, const Shape& shape, int m, const MagnusOptions& opt = {});

// T(u) from the order-by-order gauge equation: T_k = int A T_{k-1}, realized
// through the scalar iterated integrals of the word weights.
TruncatedElement solve_gauge_ode(const CartanPath& path, const Shape& shape, double tol = 1e-13);

// Omega(u) = exp(-log T) Omega exp(log T).
TruncatedElement iso_casimir(const TruncatedElement& log_t);
// Omega(u) = T^{-1} Omega T, for a T given directly.
TruncatedElement iso_casimir_from_t(const TruncatedElement& t);

// Linear system for H on the finite support generated from 1 by
// B(H) = hbar (Omega(u) H - H Omega_0); ad u^(1) is the weight operator.
class QuantumSectorSolutions {
public:
    QuantumSectorSolutions(std::span<const double> u, const TruncatedElement& omega_u,
                           const sectorial::Options& opt);

    const Shape& shape() const { return shape_; }
    const std::vector<double>& u() const { return u_; }
    std::size_t dimension() const { return basis_.size(); }
    bool lossy() const { return lossy_; }
    const sectorial::Solver& solver() const { return *solver_; }

    TruncatedElement H(int sector, double r, double arg) const;
    TruncatedElement H_series(cplx z) const;
    TruncatedElement to_element(const VectorC& y) const;

private:
    Shape shape_;
    std::vector<double> u_;
    std::vector<std::pair<uea::Monomial, int>> basis_;
    std::unique_ptr<sectorial::Solver> solver_;
    bool lossy_ = false;
};

// z^{hbar Omega_0} with log z = log r + i arg.
TruncatedElement z_power(const Shape& shape, double r, double arg);
// e^{-z ad u^(1)} (z^{-hbar Omega_0} H_left^{-1} H_right z^{hbar Omega_0}).
TruncatedElement stokes_ratio(const TruncatedElement& h_left, const TruncatedElement& h_right,
                              std::span<const double> u, double r, double arg);

enum class Omega0Convention { TwoPiI, Literal };
std::string to_string(Omega0Convention c);

struct QuantumStokesPair {
    TruncatedElement S_plus;
    TruncatedElement S_minus;
    double radius_spread = 0.0;
    bool lossy = false;
    Omega0Convention convention = Omega0Convention::TwoPiI;
};

QuantumStokesPair quantum_stokes(const QuantumSectorSolutions& sol, const std::vector<double>& radii,
                                 Omega0Convention convention = Omega0Convention::TwoPiI);

struct QuantumOptions {
    double tol = 1e-11;
    int order = 30;
    double min_anchor = 4.0;
    std::vector<double> radii{0.5, 0.75, 1.0};
    MagnusOptions magnus{};
    Omega0Convention convention = Omega0Convention::TwoPiI;
};

sectorial::Options sectorial_options(const QuantumOptions& opt);

// Omega(u) at the end of `path` (Magnus from its first point).
TruncatedElement iso_casimir_along(const CartanPath& path, const Shape& shape, const MagnusOptions& opt);

// S_hbar_pm at the end point of `path`; with `constant_omega` Omega(u) is
// replaced by Omega (the non-isomonodromic control family).
QuantumStokesPair quantum_stokes_at(const CartanPath& path, const Shape& shape, const QuantumOptions& opt,
                                    bool constant_omega = false);

struct DriftTable {
    std::vector<double> samples;                  // arclengths
    std::vector<std::vector<double>> per_order;   // [sample][k] max |S(u) - S(u_0)| at hbar^k
    std::vector<double> max_per_order;            // over samples, max of S_plus and S_minus
    bool lossy = false;
};

DriftTable quantum_isomonodromy_drift(const CartanPath& path, const Shape& shape, int samples,
                                      const QuantumOptions& opt, bool constant_omega = false);

// Prefix of a path up to arclength s.
CartanPath path_prefix(const CartanPath& path, double s);

// R_+ = e^{pi i hbar Omega_0} S_hbar_minus^{-1}, R_- = e^{pi i hbar Omega_0} S_hbar_plus^{-1},
// both after hbar -> hbar / (2 pi i), with S_hbar_minus in the 2 pi i convention.
std::pair<TruncatedElement, TruncatedElement> r_matrices(const QuantumStokesPair& s);
// Per hbar order, max entry of rep(R12 R13 R23 - R23 R13 R12) on (C^n)^{(x)3}.
std::vector<double> yang_baxter_residual(const TruncatedElement& r);

// Per hbar order, max coefficient of the two zero-curvature conditions
//   [u^(1), W_k] - [E_kk^(1), Omega(u)]     and     d_k Omega(u) - hbar [W_k, Omega(u)],
// with d_k Omega(u) from fourth-order central differences. W_k is built
// with T-conjugation unless `drop_conjugation` (control).
struct FlatnessReport {
    std::vector<double> z0;
    std::vector<double> z1;
};
FlatnessReport ikz_flatness_residual(const CartanPath& path, const Shape& shape, const MagnusOptions& opt,
                                     double step = 1e-2, bool drop_conjugation = false);

// Order-hbar part of S_hbar_pm from numeric-hbar runs of the defining
// representation (Richardson extrapolation of (S(h) - 1) / h over h, h/2),
// and the full numeric S(h) for comparison with rep(S_hbar) at hbar = h.
struct FiniteHbarStokes {
    MatrixC S_plus;
    MatrixC S_minus;
};
FiniteHbarStokes finite_hbar_stokes(std::span<const double> u, const TruncatedElement& omega_u, double h,
                                    const QuantumOptions& opt);
FiniteHbarStokes richardson_first_order(std::span<const double> u, const TruncatedElement& omega_u, double h,
                                        const QuantumOptions& opt);

// Conjugation identity: max over samples of |H_pm(z) - T^{-1} H_pm^o(z) T|
// where H^o solves the dynamical KZ equation (Omega constant) at the same u.
double conjugation_identity(const CartanPath& path, const Shape& shape, const QuantumOptions& opt,
                            const std::vector<cplx>& samples);

} // namespace isokz::quantum
