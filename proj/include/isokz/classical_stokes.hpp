#pragma once

// Canonical solutions F = H z^{[V]} e^{zU} of dF/dz = (U + V/z) F on the two
// half-plane sectors and the Stokes matrices relating them.
//
// Conventions (real regular u; log z has its cut on the negative real axis):
//   S_plus  = F_+^{-1} F_-  on the negative real axis, both factors using
//             arg z = pi in z^{[V]};
//   S_minus = F_-^{-1} F_+  on the positive real axis.
// For u_1 > ... > u_n, S_plus is upper and S_minus lower unipotent, and
// continuing F_+ once clockwise around z = 0 returns F_+ S_plus e^{-2 pi i [V]} S_minus.

#include <vector>

#include "isokz/common.hpp"
#include "isokz/sectorial.hpp"

namespace isokz::classical {

struct IrregularSystem {
    VectorC u;
    MatrixC V;
    bool skew = false;
};

// Throws InvalidInput when u is not regular, dimensions disagree, or the
// skew flag is set for a non-skew V.
void validate(const IrregularSystem& sys, double skew_tol = 1e-10);
// All u_i real and pairwise distinct.
bool real_regular(const IrregularSystem& sys);
// u real and strictly decreasing.
bool real_ordered(const IrregularSystem& sys);
MatrixC diagonal_part(const MatrixC& v);

// y = vec(H) in column-major order; lambda_{(i,j)} = u_i - u_j and
// B(H) = V H - H [V].
sectorial::Problem h_problem(const IrregularSystem& sys);

// H_1..H_K.
std::vector<MatrixC> asymptotic_coefficients(const IrregularSystem& sys, int order);

struct Options {
    double tol = 1e-11;
    int order = 30;
    double min_anchor = 4.0;
    std::vector<double> radii{1.0, 1.5, 2.0};
};

sectorial::Options sectorial_options(const Options& opt);

class SectorSolutions {
public:
    SectorSolutions(const IrregularSystem& sys, const Options& opt);

    const IrregularSystem& system() const { return sys_; }
    const sectorial::Solver& solver() const { return solver_; }
    double anchor_radius() const { return solver_.anchor().radius; }

    // H_{sector}(r e^{i arg}); sector = +1 for H_+, -1 for H_-.
    MatrixC H(int sector, double r, double arg) const;
    MatrixC H_with_anchor(double anchor_radius, int sector, double r, double arg) const;
    // F = H z^{[V]} e^{zU} with log z = log r + i arg.
    MatrixC F(int sector, double r, double arg) const;
    MatrixC normal_form(double r, double arg) const;

private:
    IrregularSystem sys_;
    sectorial::Solver solver_;
};

struct StokesPair {
    MatrixC S_plus;
    MatrixC S_minus;
    double radius_spread = 0.0;  // max deviation across evaluation radii
    double condition = 1.0;      // worst 2-norm condition number of H_+ used
    double digits = 16.0;        // rough count of trustworthy digits
};

StokesPair stokes_matrices(const IrregularSystem& sys, const Options& opt = {});
StokesPair stokes_matrices(const SectorSolutions& sol, const Options& opt);

// Largest |entry| violating unit-diagonal upper (S_plus) / lower (S_minus) shape.
double triangularity_residual(const StokesPair& s);

// Direct integration of dF/dz = (U + V/z) F.
MatrixC integrate_segment(const IrregularSystem& sys, cplx from, cplx to, const MatrixC& f0, double tol);
MatrixC integrate_arc(const IrregularSystem& sys, double r, double arg_from, double arg_to, const MatrixC& f0,
                      double tol);

struct MonodromyReport {
    double residual = 0.0;           // continued F_+ vs. F_+ S_+ e^{-2 pi i [V]} S_-, relative
    double path_disagreement = 0.0;  // two loop radii, after transport to a common point
    double liouville = 0.0;          // det F drift along the loop
};

MonodromyReport monodromy_consistency(const SectorSolutions& sol, const StokesPair& s, double tol);

// max over samples of |H_-(-z)^T H_+(z) - I| (z in H_+) and |H_+(-z)^T H_-(z) - I| (z in H_-).
// Requires the skew flag unless `require_skew_flag` is false (control runs).
std::vector<double> skew_symmetry_identity(const SectorSolutions& sol, const std::vector<cplx>& samples,
                                           bool require_skew_flag = true);

std::vector<cplx> default_skew_samples();

} // namespace isokz::classical
