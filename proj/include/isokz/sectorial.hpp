#pragma once

// Canonical sectorial solutions of linear systems with an irregular singular
// point of Poincare rank one at infinity, written in normalized form
//
//     y'(z) = lambda o y + (B y) / z,
//
// where `lambda o` is a diagonal (weight) operator and y(z) ~ unit + O(1/z)
// in the sector. The classical H-equation, the quantum equation on a
// truncated algebra and its numeric matrix representation are all instances.
//
// The formal solution sum_p y_p z^{-p} is computed by the usual recursion;
// the value at an anchor R e^{i theta} on the sector bisector seeds numerical
// integration toward the target point, first radially, then along an arc.

#include <vector>

#include <Eigen/Sparse>

#include "isokz/common.hpp"
#include "isokz/ode.hpp"

namespace isokz::sectorial {

using SparseC = Eigen::SparseMatrix<cplx>;

struct Problem {
    VectorC lambda;
    SparseC residue;
    VectorC unit;
};

struct Options {
    int order = 30;
    double tol = 1e-11;
    double min_radius = 4.0;
    double max_radius = 2000.0;
};

struct Anchor {
    double radius = 0.0;
    double tail = 0.0;  // |y_K| R^{-K}
};

class Solver {
public:
    Solver(Problem problem, Options options);

    const Problem& problem() const { return problem_; }
    const Options& options() const { return options_; }
    const std::vector<VectorC>& coefficients() const { return coeffs_; }
    const Anchor& anchor() const { return anchor_; }

    // Truncated series sum_{p<=terms} y_p z^{-p}; terms < 0 uses all.
    VectorC series(cplx z, int terms = -1) const;
    // |y' - lambda o y - B y / z| for the truncated series.
    double series_residual(cplx z, int terms) const;

    ode::ZRhs rhs() const;
    ode::Options ode_options() const;

    // Sector +1 is the upper half plane (bisector pi/2), -1 the lower one.
    // The target is r e^{i arg}, reached inside the sector's supersector.
    VectorC evaluate(int sector, double r, double arg) const;
    VectorC evaluate_with_anchor(double anchor_radius, int sector, double r, double arg) const;

private:
    Problem problem_;
    Options options_;
    std::vector<VectorC> coeffs_;
    Anchor anchor_;
    std::vector<char> zero_weight_;
};

// Largest |lambda| scaled threshold below which a weight counts as zero.
double zero_weight_threshold(const VectorC& lambda);

} // namespace isokz::sectorial
