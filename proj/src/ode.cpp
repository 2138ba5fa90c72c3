#include "isokz/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isokz::ode {

namespace {

// Dormand-Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const VectorC& err, const VectorC& y0, const VectorC& y1, const Options& opt)
{
    double r = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        r = std::max(r, std::abs(err[i]) / sc);
    }
    return r;
}

} // namespace

VectorC integrate(const Rhs& f, double t0, double t1, VectorC y, const Options& opt, Stats* stats)
{
    const double span = t1 - t0;
    if (span == 0.0) return y;
    const double dir = span > 0 ? 1.0 : -1.0;
    const double len = std::abs(span);
    const Eigen::Index n = y.size();

    VectorC k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
    f(t0, y, k1);

    double h = opt.initial_step;
    if (h <= 0.0) {
        const double ynorm = y.cwiseAbs().maxCoeff() + opt.atol;
        const double dnorm = k1.cwiseAbs().maxCoeff();
        h = dnorm > 0 ? 0.01 * ynorm / dnorm : 0.01 * len;
        // floor for states starting at (or near) zero
        h = std::clamp(h, 1e-6 * len, 0.1 * len);
    }
    h = std::min(h, len);

    // The embedded error estimate scales as h^5, per unit step as h^4.
    const double expo = opt.per_unit_step ? 0.25 : 0.2;
    double t = t0;
    long steps = 0;
    Stats local;
    while (dir * (t1 - t) > 0) {
        if (++steps > opt.max_steps) throw NumericalFailure("ode: step budget exhausted");
        if (h < opt.min_step * len) {
            std::ostringstream os;
            os << "ode: step size underflow at t = " << t << " (h = " << h << ")";
            throw NumericalFailure(os.str());
        }
        const bool last = h >= dir * (t1 - t);
        const double hs = last ? (t1 - t) : dir * h;

        tmp = y + hs * a21 * k1;
        f(t + c2 * hs, tmp, k2);
        tmp = y + hs * (a31 * k1 + a32 * k2);
        f(t + c3 * hs, tmp, k3);
        tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * hs, tmp, k4);
        tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * hs, tmp, k5);
        tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + hs, tmp, k6);
        ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + hs, ynew, k7);
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = error_norm(err, y, ynew, opt);
        if (opt.per_unit_step) en *= len / std::abs(hs);
        if (!std::isfinite(en)) {
            h *= 0.2;
            ++local.rejected;
            continue;
        }
        if (en <= 1.0) {
            t = last ? t1 : t + hs;
            y.swap(ynew);
            k1.swap(k7);
            ++local.accepted;
            const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -expo), 0.2, 5.0);
            h = std::abs(hs) * fac;
        } else {
            ++local.rejected;
            h = std::abs(hs) * std::clamp(0.9 * std::pow(en, -expo), 0.2, 1.0);
        }
    }
    if (stats) {
        stats->accepted += local.accepted;
        stats->rejected += local.rejected;
    }
    return y;
}

VectorC along(const ZRhs& f, const Segment& s, VectorC y0, const Options& opt, Stats* stats)
{
    const cplx dz = s.to - s.from;
    auto rhs = [&](double t, const VectorC& y, VectorC& dy) {
        f(s.from + t * dz, y, dy);
        dy *= dz;
    };
    return integrate(rhs, 0.0, 1.0, std::move(y0), opt, stats);
}

VectorC along(const ZRhs& f, const Arc& a, VectorC y0, const Options& opt, Stats* stats)
{
    // t is the argument itself; dz/dt = i z.
    auto rhs = [&](double t, const VectorC& y, VectorC& dy) {
        const cplx z = std::polar(a.radius, t);
        f(z, y, dy);
        dy *= kI * z;
    };
    return integrate(rhs, a.arg_from, a.arg_to, std::move(y0), opt, stats);
}

} // namespace isokz::ode
