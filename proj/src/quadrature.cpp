#include "isokz/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace isokz::quad {

namespace {

constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double a, b;
    VectorR value;
    double error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

Piece kronrod(const Integrand& f, double a, double b, int& evals)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    VectorR fc = f(c);
    VectorR k = wgk[7] * fc;
    VectorR g = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const VectorR f1 = f(c - h * xgk[j]);
        const VectorR f2 = f(c + h * xgk[j]);
        k += wgk[j] * (f1 + f2);
        if (j % 2 == 1) g += wg[j / 2] * (f1 + f2);
    }
    evals += 15;
    Piece p{a, b, h * k, 0.0};
    p.error = (h * (k - g)).cwiseAbs().maxCoeff();
    return p;
}

} // namespace

Result integrate(const Integrand& f, double a, double b, std::span<const double> breakpoints, double abs_tol,
                 double rel_tol, int max_intervals)
{
    Result r;
    std::vector<double> cuts{a};
    for (double t : breakpoints) {
        if ((t - a) * (t - b) < 0) cuts.push_back(t);
    }
    cuts.push_back(b);
    if (a <= b) {
        std::sort(cuts.begin(), cuts.end());
    } else {
        std::sort(cuts.begin(), cuts.end(), std::greater<>());
    }

    std::priority_queue<Piece> heap;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k] == cuts[k + 1]) continue;
        heap.push(kronrod(f, cuts[k], cuts[k + 1], r.evaluations));
    }
    if (heap.empty()) {
        r.value = f(a) * 0.0;
        r.converged = true;
        return r;
    }

    auto totals = [&](VectorR& v, double& e) {
        auto copy = heap;
        v = VectorR::Zero(copy.top().value.size());
        e = 0.0;
        while (!copy.empty()) {
            v += copy.top().value;
            e += copy.top().error;
            copy.pop();
        }
    };

    VectorR value;
    double error = 0.0;
    totals(value, error);
    while (error > std::max(abs_tol, rel_tol * value.cwiseAbs().maxCoeff())) {
        if (static_cast<int>(heap.size()) >= max_intervals) {
            r.value = value;
            r.error = error;
            return r;
        }
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Piece left = kronrod(f, worst.a, mid, r.evaluations);
        Piece right = kronrod(f, mid, worst.b, r.evaluations);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(std::move(left));
        heap.push(std::move(right));
        if (error < 0) totals(value, error);
    }
    // Resum once to avoid drift from the incremental updates.
    totals(value, error);
    r.value = value;
    r.error = error;
    r.converged = true;
    return r;
}

} // namespace isokz::quad
