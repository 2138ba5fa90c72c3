#pragma once

// Isomonodromic deformation of dF/dz = (U + V/z) F in the canonical
// coordinates u. With V_k = ad_{E_kk} ad_U^{-1} V the joint system
//
//     dF/dz = (U + V/z) F,    dF/du_k = (z E_kk + V_k) F
//
// is flat exactly when [U, V_k] = [E_kk, V] (automatic) and
// dV/du_k = [V_k, V].

#include <vector>

#include "isokz/classical_stokes.hpp"
#include "isokz/common.hpp"

namespace isokz::isomonodromy {

struct CartanPath {
    std::vector<VectorR> waypoints;

    int dim() const { return waypoints.empty() ? 0 : static_cast<int>(waypoints.front().size()); }
    double length() const;
    // Point at arclength s (clamped to [0, length]).
    VectorR at(double s) const;
    // Arclength positions of the waypoints.
    std::vector<double> breakpoints() const;
};

// Throws InvalidInput for empty paths, inconsistent dimensions, points
// closer than `guard` to a wall, or a change of coordinate ordering.
void validate(const CartanPath& path, double guard = 1e-8);

// Off-diagonal V_ij / (u_i - u_j), zero diagonal.
MatrixC ad_u_inverse(const VectorR& u, const MatrixC& v, double guard = 1e-8);
// V_k = E_kk W - W E_kk with W = ad_U^{-1} V; k is 0-based.
MatrixC lambda_coefficient(const VectorR& u, const MatrixC& v, int k);
std::vector<MatrixC> lambda_form(const VectorR& u, const MatrixC& v);
// dV/du_k = [V_k, V].
MatrixC iso_vector_field(const VectorR& u, const MatrixC& v, int k);

struct FlowOptions {
    double tol = 1e-12;
    double blowup_factor = 1e3;
};

struct FlowSample {
    double s = 0.0;
    VectorR u;
    MatrixC V;
};

// V along the path at the requested arclengths (sorted ascending).
std::vector<FlowSample> integrate_iso_flow(const CartanPath& path, const MatrixC& v0, const std::vector<double>& at,
                                           const FlowOptions& opt = {});
std::vector<double> even_samples(const CartanPath& path, int count);

// Coefficients of [d_z - A_z, d_k - A_k] = C0 + C1 / z with A_k = z E_kk + L_k.
struct Curvature {
    MatrixC c0;
    MatrixC c1;
};

Curvature curvature(const VectorR& u, const MatrixC& v, const MatrixC& dv_k, const MatrixC& l_k, int k);

struct CurvatureRow {
    double s = 0.0;
    int k = 0;
    cplx z;
    double residual = 0.0;
};

// Zero-curvature residual along the flow; dV/du_k is obtained by a
// fourth-order central difference of separate flow runs, so the check
// exercises the integrated V(u) rather than the vector field alone. With
// `drop_lambda` the connection form is replaced by zero (control).
std::vector<CurvatureRow> dubrovin_flat_sections(const CartanPath& path, const MatrixC& v0,
                                                 const std::vector<cplx>& z_grid, int samples,
                                                 const FlowOptions& opt = {}, bool drop_lambda = false);

struct DriftRow {
    double s = 0.0;
    double drift_plus = 0.0;
    double drift_minus = 0.0;
    double skewness = 0.0;
    double spectrum = 0.0;
};

// Drift is measured against `reference` when given (typically S(u_0) at a
// much tighter tolerance), otherwise against S(u_0) at the same tolerance.
std::vector<DriftRow> stokes_drift(const CartanPath& path, const MatrixC& v0, int samples, const FlowOptions& flow,
                                   const classical::Options& stokes,
                                   const classical::StokesPair* reference = nullptr);

// Hausdorff distance between the spectra of two matrices.
double spectrum_distance(const MatrixC& a, const MatrixC& b);

} // namespace isokz::isomonodromy
