#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for vector-valued real
// integrands. Breakpoints (e.g. path corners) are always interval ends.

#include <functional>
#include <span>

#include "isokz/common.hpp"

namespace isokz::quad {

struct Result {
    VectorR value;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Integrand = std::function<VectorR(double)>;

// Subdivides until the summed error estimate is below
// max(abs_tol, rel_tol * |value|_inf) or `max_intervals` is reached.
Result integrate(const Integrand& f, double a, double b, std::span<const double> breakpoints, double abs_tol,
                 double rel_tol = 0.0, int max_intervals = 2000);

} // namespace isokz::quad
