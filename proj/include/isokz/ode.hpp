#pragma once

// Adaptive Dormand-Prince 5(4) stepping for complex vector states along a
// real parameter. Paths in the complex plane are handled by the caller via
// the chain rule (dy/dt = f(z(t), y) z'(t)).

#include <functional>

#include "isokz/common.hpp"

namespace isokz::ode {

struct Options {
    double rtol = 1e-11;
    double atol = 1e-13;
    double initial_step = 0.0;  // 0 picks a step from the first derivative
    double min_step = 1e-13;    // relative to the interval length
    long max_steps = 5'000'000;
    // Error per unit step: the local error of a step of length h may use only
    // the fraction h / |t1 - t0| of the tolerance, which makes the global
    // error proportional to the tolerance instead of merely controlled by it.
    bool per_unit_step = true;
};

struct Stats {
    long accepted = 0;
    long rejected = 0;
};

using Rhs = std::function<void(double t, const VectorC& y, VectorC& dy)>;

// Integrates from t0 to t1 (either direction). Throws NumericalFailure when
// the step size underflows or the step budget is exhausted.
VectorC integrate(const Rhs& f, double t0, double t1, VectorC y0, const Options& opt = {},
                  Stats* stats = nullptr);

// Straight segment and circular arc parametrizations in the z-plane.
struct Segment {
    cplx from;
    cplx to;
};

struct Arc {
    double radius;
    double arg_from;
    double arg_to;
};

using ZRhs = std::function<void(cplx z, const VectorC& y, VectorC& dy)>;

VectorC along(const ZRhs& f, const Segment& s, VectorC y0, const Options& opt = {}, Stats* stats = nullptr);
VectorC along(const ZRhs& f, const Arc& a, VectorC y0, const Options& opt = {}, Stats* stats = nullptr);

} // namespace isokz::ode
