#include "isokz/quantum_connection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <queue>

#include "isokz/ode.hpp"
#include "isokz/quadrature.hpp"

namespace isokz::quantum {

using uea::Monomial;
using uea::Word;

std::vector<std::pair<int, int>> positive_pairs(int n)
{
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) out.emplace_back(i, j);
    return out;
}

TruncatedElement gauge_generator(const Shape& shape, int i, int j)
{
    if (shape.arity != 2) throw InvalidInput("gauge generator needs an arity-2 shape");
    const TruncatedElement k = uea::kappa(shape.n, i, j, shape.hbar_order, shape.degree_cap);
    const std::vector<int> first{0};
    const std::vector<int> second{1};
    return 0.5 * (uea::embed_slots(k, first, 2) + uea::embed_slots(k, second, 2));
}

// ---------------------------------------------------------------------------
// Gauge form along a path

GaugeForm::GaugeForm(const CartanPath& path) : path_(path)
{
    isomonodromy::validate(path);
    pairs_ = positive_pairs(path.dim());
    breaks_ = path.breakpoints();
    length_ = path.length();
}

VectorR GaugeForm::f(double s) const
{
    const auto& w = path_.waypoints;
    VectorR out = VectorR::Zero(static_cast<Eigen::Index>(pairs_.size()));
    if (w.size() < 2) return out;
    std::size_t seg = 0;
    while (seg + 2 < w.size() && s > breaks_[seg + 1]) ++seg;
    return f(s, seg);
}

VectorR GaugeForm::f(double s, std::size_t seg) const
{
    const auto& w = path_.waypoints;
    VectorR out = VectorR::Zero(static_cast<Eigen::Index>(pairs_.size()));
    if (seg + 1 >= w.size()) return out;
    const double len = breaks_[seg + 1] - breaks_[seg];
    if (len <= 0) return out;
    const VectorR dir = (w[seg + 1] - w[seg]) / len;
    const VectorR u = path_.at(s);
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        const int i = pairs_[p].first - 1;
        const int j = pairs_[p].second - 1;
        out[static_cast<Eigen::Index>(p)] = (dir[i] - dir[j]) / (u[i] - u[j]);
    }
    return out;
}

VectorR GaugeForm::first_integrals() const
{
    VectorR out(static_cast<Eigen::Index>(pairs_.size()));
    const VectorR& a = path_.waypoints.front();
    const VectorR& b = path_.waypoints.back();
    for (std::size_t p = 0; p < pairs_.size(); ++p) {
        const int i = pairs_[p].first - 1;
        const int j = pairs_[p].second - 1;
        out[static_cast<Eigen::Index>(p)] = std::log((b[i] - b[j]) / (a[i] - a[j]));
    }
    return out;
}

namespace {

// log(alpha_p(s) / alpha_p(0)) for every pair.
VectorR log_ratios(const CartanPath& path, const std::vector<std::pair<int, int>>& pairs, double s)
{
    const VectorR u = path.at(s);
    const VectorR& a = path.waypoints.front();
    VectorR out(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const int i = pairs[p].first - 1;
        const int j = pairs[p].second - 1;
        out[static_cast<Eigen::Index>(p)] = std::log((u[i] - u[j]) / (a[i] - a[j]));
    }
    return out;
}

std::vector<double> breaks_below(const std::vector<double>& b, double t)
{
    std::vector<double> out;
    for (double x : b)
        if (x > 0 && x < t) out.push_back(x);
    return out;
}

} // namespace

MagnusSolution magnus_terms(const CartanPath& path, const Shape& shape, int m, const MagnusOptions& opt)
{
    if (m < 1 || m > 3) throw InvalidInput("Magnus order must be 1, 2 or 3");
    if (shape.arity != 2) throw InvalidInput("Magnus terms live in an arity-2 shape");
    if (path.dim() != shape.n) throw InvalidInput("path dimension differs from n");
    const GaugeForm g(path);
    const int P = g.pair_count();
    const int order = std::min(m, shape.hbar_order);
    const double L = g.length();
    const auto& pairs = g.pairs();
    const std::vector<double> brk = g.breakpoints();

    std::vector<TruncatedElement> X;
    for (const auto& [i, j] : pairs) X.push_back(gauge_generator(shape, i, j));

    MagnusSolution out;
    out.log_T = TruncatedElement::zero(shape);
    if (order < 1) return out;

    // E_1 = sum_p log(alpha_p(end)/alpha_p(start)) X_p, in closed form.
    const VectorR w1 = g.first_integrals();
    TruncatedElement e1 = TruncatedElement::zero(shape);
    for (int p = 0; p < P; ++p) e1 += cplx(w1[p]) * X[static_cast<std::size_t>(p)];
    out.E.push_back(e1);

    // w_pq(t) = int_0^t f_p(s) log(alpha_q(s)/alpha_q(0)) ds
    const double inner_tol = opt.tol * 1e-2;
    auto w2_at = [&](double t, double& err) {
        const auto b = breaks_below(brk, t);
        const auto r = quad::integrate(
            [&](double s) {
                const VectorR f = g.f(s);
                const VectorR l = log_ratios(path, pairs, s);
                VectorR v(P * P);
                for (int p = 0; p < P; ++p)
                    for (int q = 0; q < P; ++q) v[p * P + q] = f[p] * l[q];
                return v;
            },
            0.0, t, b, inner_tol, 0.0, opt.max_intervals);
        if (!r.converged) throw NumericalFailure("Magnus quadrature did not converge (order 2)");
        err += r.error;
        return r.value;
    };

    if (order >= 2) {
        double err = 0.0;
        const VectorR w2 = w2_at(L, err);
        out.quadrature_error += err;
        TruncatedElement e2 = TruncatedElement::zero(shape);
        for (int p = 0; p < P; ++p)
            for (int q = 0; q < P; ++q) {
                if (p == q || w2[p * P + q] == 0.0) continue;
                e2 += cplx(0.5 * w2[p * P + q]) *
                      uea::commutator(X[static_cast<std::size_t>(p)], X[static_cast<std::size_t>(q)]);
            }
        out.E.push_back(e2);
    }

    if (order >= 3) {
        // w_pqr = int_0^L f_p(t) w_qr(t) dt, with w_qr itself an adaptive quadrature.
        double inner_err = 0.0;
        const auto r = quad::integrate(
            [&](double t) {
                const VectorR f = g.f(t);
                const VectorR w = w2_at(t, inner_err);
                VectorR v(P * P * P);
                for (int p = 0; p < P; ++p)
                    for (int qr = 0; qr < P * P; ++qr) v[p * P * P + qr] = f[p] * w[qr];
                return v;
            },
            0.0, L, brk, opt.tol, 0.0, opt.max_intervals);
        if (!r.converged) throw NumericalFailure("Magnus quadrature did not converge (order 3)");
        out.quadrature_error += r.error;
        std::map<std::pair<int, int>, TruncatedElement> c2;
        auto br = [&](int a, int b) -> const TruncatedElement& {
            auto it = c2.find({a, b});
            if (it == c2.end())
                it = c2.emplace(std::make_pair(a, b),
                                uea::commutator(X[static_cast<std::size_t>(a)], X[static_cast<std::size_t>(b)]))
                         .first;
            return it->second;
        };
        TruncatedElement e3 = TruncatedElement::zero(shape);
        for (int p = 0; p < P; ++p)
            for (int q = 0; q < P; ++q)
                for (int s = 0; s < P; ++s) {
                    const double w = r.value[p * P * P + q * P + s];
                    if (w == 0.0) continue;
                    TruncatedElement t = uea::commutator(X[static_cast<std::size_t>(p)], br(q, s)) +
                                         uea::commutator(X[static_cast<std::size_t>(s)], br(q, p));
                    if (t.is_zero()) continue;
                    e3 += cplx(w / 6.0) * t;
                }
        out.E.push_back(e3);
    }

    for (std::size_t k = 0; k < out.E.size(); ++k) {
        out.log_T += uea::hbar_shift(out.E[k], static_cast<int>(k) + 1);
        out.lossy = out.lossy || out.E[k].lossy();
    }
    return out;
}

TruncatedElement solve_gauge_ode(const CartanPath& path, const Shape& shape, double tol)
{
    if (shape.arity != 2) throw InvalidInput("gauge transform lives in an arity-2 shape");
    if (path.dim() != shape.n) throw InvalidInput("path dimension differs from n");
    const GaugeForm g(path);
    const int P = g.pair_count();
    const int N = shape.hbar_order;

    // Words over the pairs, by length; weight of p.w satisfies w' = f_p * weight(w).
    std::vector<std::vector<int>> words;
    std::vector<int> parent;  // index of the tail word, -1 for length one
    std::vector<std::size_t> level_begin{0};
    for (int p = 0; p < P && N >= 1; ++p) {
        words.push_back({p});
        parent.push_back(-1);
    }
    for (int len = 2; len <= N; ++len) {
        const std::size_t lo = level_begin.back();
        const std::size_t hi = words.size();
        level_begin.push_back(hi);
        for (int p = 0; p < P; ++p)
            for (std::size_t w = lo; w < hi; ++w) {
                std::vector<int> word{p};
                word.insert(word.end(), words[w].begin(), words[w].end());
                words.push_back(std::move(word));
                parent.push_back(static_cast<int>(w));
            }
    }

    VectorC y = VectorC::Zero(static_cast<Eigen::Index>(words.size()));
    std::size_t seg = 0;
    const auto rhs = [&](double s, const VectorC& x, VectorC& dx) {
        const VectorR f = g.f(s, seg);
        dx.resize(x.size());
        for (std::size_t w = 0; w < words.size(); ++w) {
            const double fp = f[words[w].front()];
            dx[static_cast<Eigen::Index>(w)] = parent[w] < 0 ? cplx(fp) : fp * x[parent[w]];
        }
    };
    ode::Options o;
    o.rtol = tol;
    o.atol = tol;
    const auto brk = g.breakpoints();
    for (seg = 0; seg + 1 < brk.size(); ++seg) {
        if (brk[seg + 1] > brk[seg]) y = ode::integrate(rhs, brk[seg], brk[seg + 1], y, o);
    }

    std::vector<TruncatedElement> X;
    for (const auto& [i, j] : g.pairs()) X.push_back(gauge_generator(shape, i, j));
    std::vector<TruncatedElement> prod(words.size());
    TruncatedElement t = TruncatedElement::one(shape);
    for (std::size_t w = 0; w < words.size(); ++w) {
        const auto& x = X[static_cast<std::size_t>(words[w].front())];
        prod[w] = parent[w] < 0 ? x : x * prod[static_cast<std::size_t>(parent[w])];
        t += uea::hbar_shift(y[static_cast<Eigen::Index>(w)] * prod[w], static_cast<int>(words[w].size()));
    }
    return t;
}

TruncatedElement iso_casimir(const TruncatedElement& log_t)
{
    const Shape& s = log_t.shape();
    return uea::adjoint_exp(log_t, uea::casimir(s.n, s.hbar_order, s.degree_cap));
}

TruncatedElement iso_casimir_from_t(const TruncatedElement& t)
{
    const Shape& s = t.shape();
    return uea::conjugate(t, uea::casimir(s.n, s.hbar_order, s.degree_cap));
}

// ---------------------------------------------------------------------------
// Canonical solutions on the truncated algebra

QuantumSectorSolutions::QuantumSectorSolutions(std::span<const double> u, const TruncatedElement& omega_u,
                                               const sectorial::Options& opt)
    : shape_(omega_u.shape()), u_(u.begin(), u.end())
{
    if (shape_.arity != 2) throw InvalidInput("quantum connection needs an arity-2 shape");
    if (static_cast<int>(u_.size()) != shape_.n) throw InvalidInput("u has the wrong dimension");
    const TruncatedElement omega0 = uea::cartan_casimir(shape_.n, shape_.hbar_order, shape_.degree_cap);
    lossy_ = omega_u.lossy();

    std::map<std::pair<Monomial, int>, int> index;
    std::vector<Eigen::Triplet<cplx>> trip;
    auto slot = [&](const Monomial& m, int k) {
        auto [it, fresh] = index.emplace(std::make_pair(m, k), static_cast<int>(basis_.size()));
        if (fresh) basis_.emplace_back(m, k);
        return it->second;
    };
    slot(Monomial(2), 0);
    for (std::size_t c = 0; c < basis_.size(); ++c) {
        TruncatedElement e(shape_);
        const auto [m, k] = basis_[c];
        e.add_term(m, k, 1.0);
        const TruncatedElement col = uea::hbar_shift(omega_u * e - e * omega0, 1);
        lossy_ = lossy_ || col.lossy();
        for (const auto& [mm, poly] : col.terms())
            for (std::size_t kk = 0; kk < poly.size(); ++kk) {
                if (poly[kk] == cplx(0)) continue;
                const int row = slot(mm, static_cast<int>(kk));
                trip.emplace_back(row, static_cast<int>(c), poly[kk]);
            }
    }

    const auto dim = static_cast<Eigen::Index>(basis_.size());
    sectorial::Problem pr;
    pr.lambda.resize(dim);
    for (Eigen::Index a = 0; a < dim; ++a)
        pr.lambda[a] = uea::weight(shape_.n, basis_[static_cast<std::size_t>(a)].first[0], u_);
    pr.residue.resize(dim, dim);
    pr.residue.setFromTriplets(trip.begin(), trip.end());
    pr.unit = VectorC::Zero(dim);
    pr.unit[0] = 1.0;
    solver_ = std::make_unique<sectorial::Solver>(std::move(pr), opt);
}

TruncatedElement QuantumSectorSolutions::to_element(const VectorC& y) const
{
    TruncatedElement e(shape_);
    for (std::size_t a = 0; a < basis_.size(); ++a) {
        const cplx c = y[static_cast<Eigen::Index>(a)];
        if (c != cplx(0)) e.add_term(basis_[a].first, basis_[a].second, c);
    }
    if (lossy_) e.mark_lossy();
    return e;
}

TruncatedElement QuantumSectorSolutions::H(int sector, double r, double arg) const
{
    return to_element(solver_->evaluate(sector, r, arg));
}

TruncatedElement QuantumSectorSolutions::H_series(cplx z) const
{
    return to_element(solver_->series(z));
}

TruncatedElement z_power(const Shape& shape, double r, double arg)
{
    const cplx logz(std::log(r), arg);
    const TruncatedElement o0 = uea::cartan_casimir(shape.n, shape.hbar_order, shape.degree_cap);
    return uea::exp_series(uea::hbar_shift(logz * o0, 1));
}

TruncatedElement stokes_ratio(const TruncatedElement& h_left, const TruncatedElement& h_right,
                              std::span<const double> u, double r, double arg)
{
    const Shape& s = h_left.shape();
    const TruncatedElement zp = z_power(s, r, arg);
    const TruncatedElement zm = z_power(s, 1.0 / r, -arg);
    const TruncatedElement x = zm * (uea::invert(h_left) * h_right) * zp;
    return uea::exp_ad_cartan(x, u, 0, -std::polar(r, arg));
}

std::string to_string(Omega0Convention c)
{
    return c == Omega0Convention::TwoPiI ? "exp(2 pi i hbar Omega_0)" : "exp(hbar Omega_0)";
}

QuantumStokesPair quantum_stokes(const QuantumSectorSolutions& sol, const std::vector<double>& radii,
                                 Omega0Convention convention)
{
    if (radii.empty()) throw InvalidInput("quantum stokes: at least one evaluation radius is required");
    QuantumStokesPair out;
    out.convention = convention;
    const auto& u = sol.u();
    bool first = true;
    for (double r : radii) {
        TruncatedElement sp = stokes_ratio(sol.H(-1, r, 0.0), sol.H(1, r, 0.0), u, r, 0.0);
        TruncatedElement sm = stokes_ratio(sol.H(1, r, kPi), sol.H(-1, r, -kPi), u, r, kPi);
        if (convention == Omega0Convention::Literal) {
            const Shape& s = sol.shape();
            const TruncatedElement o0 = uea::cartan_casimir(s.n, s.hbar_order, s.degree_cap);
            sm = sm * uea::exp_series(uea::hbar_shift(cplx(1.0, -2 * kPi) * o0, 1));
        }
        if (first) {
            out.S_plus = std::move(sp);
            out.S_minus = std::move(sm);
            first = false;
        } else {
            out.radius_spread = std::max({out.radius_spread, (sp - out.S_plus).max_abs(),
                                          (sm - out.S_minus).max_abs()});
        }
    }
    out.lossy = sol.lossy() || out.S_plus.lossy() || out.S_minus.lossy();
    return out;
}

sectorial::Options sectorial_options(const QuantumOptions& opt)
{
    sectorial::Options o;
    o.order = opt.order;
    o.tol = opt.tol;
    o.min_radius = opt.min_anchor;
    return o;
}

TruncatedElement iso_casimir_along(const CartanPath& path, const Shape& shape, const MagnusOptions& opt)
{
    if (path.waypoints.size() < 2 || path.length() == 0.0) return uea::casimir(shape.n, shape.hbar_order, shape.degree_cap);
    return iso_casimir(magnus_terms(path, shape, 3, opt).log_T);
}

namespace {

std::vector<double> to_std(const VectorR& v) { return {v.data(), v.data() + v.size()}; }

} // namespace

QuantumStokesPair quantum_stokes_at(const CartanPath& path, const Shape& shape, const QuantumOptions& opt,
                                    bool constant_omega)
{
    isomonodromy::validate(path);
    const TruncatedElement omega = constant_omega ? uea::casimir(shape.n, shape.hbar_order, shape.degree_cap)
                                                  : iso_casimir_along(path, shape, opt.magnus);
    const auto u = to_std(path.waypoints.back());
    const QuantumSectorSolutions sol(u, omega, sectorial_options(opt));
    return quantum_stokes(sol, opt.radii, opt.convention);
}

CartanPath path_prefix(const CartanPath& path, double s)
{
    CartanPath out;
    const auto brk = path.breakpoints();
    out.waypoints.push_back(path.waypoints.front());
    for (std::size_t k = 1; k < path.waypoints.size() && brk[k] < s; ++k) out.waypoints.push_back(path.waypoints[k]);
    if (s > 0) out.waypoints.push_back(path.at(s));
    return out;
}

DriftTable quantum_isomonodromy_drift(const CartanPath& path, const Shape& shape, int samples,
                                      const QuantumOptions& opt, bool constant_omega)
{
    isomonodromy::validate(path);
    DriftTable out;
    out.samples = isomonodromy::even_samples(path, samples);
    out.max_per_order.assign(static_cast<std::size_t>(shape.hbar_order) + 1, 0.0);
    const QuantumStokesPair ref = quantum_stokes_at(path_prefix(path, 0.0), shape, opt, constant_omega);
    out.lossy = ref.lossy;
    for (double s : out.samples) {
        const QuantumStokesPair cur = quantum_stokes_at(path_prefix(path, s), shape, opt, constant_omega);
        out.lossy = out.lossy || cur.lossy;
        const TruncatedElement dp = cur.S_plus - ref.S_plus;
        const TruncatedElement dm = cur.S_minus - ref.S_minus;
        std::vector<double> row;
        for (int k = 0; k <= shape.hbar_order; ++k) {
            const double d = std::max(dp.max_abs(k), dm.max_abs(k));
            row.push_back(d);
            out.max_per_order[static_cast<std::size_t>(k)] = std::max(out.max_per_order[static_cast<std::size_t>(k)], d);
        }
        out.per_order.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// R-matrices and the Yang-Baxter equation

std::pair<TruncatedElement, TruncatedElement> r_matrices(const QuantumStokesPair& s)
{
    const Shape& sh = s.S_plus.shape();
    const TruncatedElement o0 = uea::cartan_casimir(sh.n, sh.hbar_order, sh.degree_cap);
    const TruncatedElement half = uea::exp_series(uea::hbar_shift(cplx(0.0, kPi) * o0, 1));
    const cplx rescale = 1.0 / (2.0 * kPi * kI);
    TruncatedElement sm = s.S_minus;
    if (s.convention == Omega0Convention::Literal)
        sm = sm * uea::exp_series(uea::hbar_shift(cplx(-1.0, 2 * kPi) * o0, 1));
    TruncatedElement rp = uea::rescale_hbar(half * uea::invert(sm), rescale);
    TruncatedElement rm = uea::rescale_hbar(half * uea::invert(s.S_plus), rescale);
    return {std::move(rp), std::move(rm)};
}

std::vector<double> yang_baxter_residual(const TruncatedElement& r)
{
    if (r.arity() != 2) throw InvalidInput("R-matrix must have arity 2");
    const std::vector<int> m12{0, 1};
    const std::vector<int> m13{0, 2};
    const std::vector<int> m23{1, 2};
    const uea::HbarMatrix r12 = uea::evaluation_rep(uea::embed_slots(r, m12, 3));
    const uea::HbarMatrix r13 = uea::evaluation_rep(uea::embed_slots(r, m13, 3));
    const uea::HbarMatrix r23 = uea::evaluation_rep(uea::embed_slots(r, m23, 3));
    const uea::HbarMatrix d = (r12 * r13) * r23 - (r23 * r13) * r12;
    std::vector<double> out;
    for (const auto& c : d.coeffs) out.push_back(c.cwiseAbs().maxCoeff());
    return out;
}

// ---------------------------------------------------------------------------
// Zero curvature of the isomonodromic KZ connection

namespace {

// Omega(u + delta e_k) through the cocycle T(u + delta e_k) = T_seg T(u).
TruncatedElement shifted_casimir(const VectorR& u, const TruncatedElement& log_t, int k, double delta,
                                 const MagnusOptions& opt)
{
    CartanPath seg;
    seg.waypoints.push_back(u);
    VectorR v = u;
    v[k] += delta;
    seg.waypoints.push_back(v);
    return uea::adjoint_exp(log_t, iso_casimir(magnus_terms(seg, log_t.shape(), 3, opt).log_T));
}

} // namespace

FlatnessReport ikz_flatness_residual(const CartanPath& path, const Shape& shape, const MagnusOptions& opt,
                                     double step, bool drop_conjugation)
{
    isomonodromy::validate(path);
    const int n = shape.n;
    const VectorR u = path.waypoints.back();
    const std::vector<double> us = to_std(u);
    const TruncatedElement log_t = (path.waypoints.size() < 2 || path.length() == 0.0)
                                       ? TruncatedElement::zero(shape)
                                       : magnus_terms(path, shape, 3, opt).log_T;
    const TruncatedElement omega_u = iso_casimir(log_t);

    FlatnessReport out;
    out.z0.assign(static_cast<std::size_t>(shape.hbar_order) + 1, 0.0);
    out.z1.assign(static_cast<std::size_t>(shape.hbar_order) + 1, 0.0);
    for (int k = 0; k < n; ++k) {
        TruncatedElement w = TruncatedElement::zero(shape);
        for (const auto& [i, j] : positive_pairs(n)) {
            const double dk = (k == i - 1 ? 1.0 : 0.0) - (k == j - 1 ? 1.0 : 0.0);
            if (dk == 0.0) continue;
            TruncatedElement op = uea::root_pair_casimir(n, i, j, shape.hbar_order, shape.degree_cap);
            if (!drop_conjugation) op = uea::adjoint_exp(log_t, op);
            w += cplx(dk / (u[i - 1] - u[j - 1])) * op;
        }
        const TruncatedElement ekk = TruncatedElement::generator(shape, 0, k + 1, k + 1);
        const TruncatedElement c0 = uea::ad_cartan(w, us, 0) - uea::commutator(ekk, omega_u);

        // fourth-order central difference of Omega(u) in u_k
        const TruncatedElement p1 = shifted_casimir(u, log_t, k, step, opt);
        const TruncatedElement m1 = shifted_casimir(u, log_t, k, -step, opt);
        const TruncatedElement p2 = shifted_casimir(u, log_t, k, 2 * step, opt);
        const TruncatedElement m2 = shifted_casimir(u, log_t, k, -2 * step, opt);
        const TruncatedElement d = cplx(1.0 / (12.0 * step)) * (cplx(8.0) * (p1 - m1) - (p2 - m2));
        const TruncatedElement c1 = d - uea::hbar_shift(uea::commutator(w, omega_u), 1);
        for (int q = 0; q <= shape.hbar_order; ++q) {
            out.z0[static_cast<std::size_t>(q)] = std::max(out.z0[static_cast<std::size_t>(q)], c0.max_abs(q));
            out.z1[static_cast<std::size_t>(q)] = std::max(out.z1[static_cast<std::size_t>(q)], c1.max_abs(q));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Numeric hbar in the defining representation

namespace {

sectorial::Solver matrix_solver(const MatrixC& dU, const MatrixC& v, const VectorC& lam, const QuantumOptions& opt)
{
    // H' = [U, H] + (V H - H Lambda) / z on column-major vec(H).
    const auto m = dU.rows();
    sectorial::Problem pr;
    pr.lambda.resize(m * m);
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i) {
            pr.lambda[i + m * j] = dU(i, i) - dU(j, j);
            for (Eigen::Index a = 0; a < m; ++a)
                if (v(i, a) != cplx(0)) trip.emplace_back(i + m * j, a + m * j, v(i, a));
            if (lam[j] != cplx(0)) trip.emplace_back(i + m * j, i + m * j, -lam[j]);
        }
    pr.residue.resize(m * m, m * m);
    pr.residue.setFromTriplets(trip.begin(), trip.end());
    pr.unit = VectorC::Zero(m * m);
    for (Eigen::Index i = 0; i < m; ++i) pr.unit[i + m * i] = 1.0;
    return sectorial::Solver(std::move(pr), sectorial_options(opt));
}

MatrixC unvec(const VectorC& y, Eigen::Index m)
{
    MatrixC out(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i) out(i, j) = y[i + m * j];
    return out;
}

MatrixC strip(const MatrixC& x, const MatrixC& dU, const VectorC& lam, double r, double arg)
{
    const cplx z = std::polar(r, arg);
    const cplx logz(std::log(r), arg);
    MatrixC out = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out(i, j) *= std::exp(-z * (dU(i, i) - dU(j, j)) - logz * (lam[i] - lam[j]));
    return out;
}

} // namespace

FiniteHbarStokes finite_hbar_stokes(std::span<const double> u, const TruncatedElement& omega_u, double h,
                                    const QuantumOptions& opt)
{
    const Shape& s = omega_u.shape();
    const int n = s.n;
    const auto m = static_cast<Eigen::Index>(n * n);
    MatrixC dU = MatrixC::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) dU(a, a) = u[static_cast<std::size_t>(a / n)];
    const MatrixC v = h * uea::evaluation_rep(omega_u).evaluate(h);
    const MatrixC o0 = uea::evaluation_rep(uea::cartan_casimir(n, s.hbar_order, s.degree_cap)).coeffs[0];
    const VectorC lam = h * o0.diagonal();
    const sectorial::Solver sol = matrix_solver(dU, v, lam, opt);
    const double r = opt.radii.front();
    const MatrixC hp_pos = unvec(sol.evaluate(1, r, 0.0), m);
    const MatrixC hm_pos = unvec(sol.evaluate(-1, r, 0.0), m);
    const MatrixC hp_neg = unvec(sol.evaluate(1, r, kPi), m);
    const MatrixC hm_neg = unvec(sol.evaluate(-1, r, -kPi), m);
    FiniteHbarStokes out;
    out.S_plus = strip(hm_pos.partialPivLu().solve(hp_pos), dU, lam, r, 0.0);
    out.S_minus = strip(hp_neg.partialPivLu().solve(hm_neg), dU, lam, r, kPi);
    if (opt.convention == Omega0Convention::Literal) {
        const VectorC f = (lam * cplx(1.0, -2 * kPi)).array().exp();
        out.S_minus = out.S_minus * f.asDiagonal();
    }
    return out;
}

FiniteHbarStokes richardson_first_order(std::span<const double> u, const TruncatedElement& omega_u, double h,
                                        const QuantumOptions& opt)
{
    const FiniteHbarStokes a = finite_hbar_stokes(u, omega_u, h, opt);
    const FiniteHbarStokes b = finite_hbar_stokes(u, omega_u, h / 2, opt);
    const auto m = a.S_plus.rows();
    const MatrixC id = MatrixC::Identity(m, m);
    FiniteHbarStokes out;
    out.S_plus = 2.0 * (b.S_plus - id) / (h / 2) - (a.S_plus - id) / h;
    out.S_minus = 2.0 * (b.S_minus - id) / (h / 2) - (a.S_minus - id) / h;
    return out;
}

double conjugation_identity(const CartanPath& path, const Shape& shape, const QuantumOptions& opt,
                            const std::vector<cplx>& samples)
{
    isomonodromy::validate(path);
    const TruncatedElement log_t = (path.waypoints.size() < 2 || path.length() == 0.0)
                                       ? TruncatedElement::zero(shape)
                                       : magnus_terms(path, shape, 3, opt.magnus).log_T;
    const auto u = to_std(path.waypoints.back());
    const QuantumSectorSolutions iso(u, iso_casimir(log_t), sectorial_options(opt));
    const QuantumSectorSolutions dkz(u, uea::casimir(shape.n, shape.hbar_order, shape.degree_cap),
                                     sectorial_options(opt));
    double worst = 0.0;
    for (const cplx z : samples) {
        const double r = std::abs(z);
        const double a = std::arg(z);
        for (int sector : {1, -1}) {
            double arg = a;
            if (std::abs(arg - sector * kPi / 2) >= kPi) arg += sector * 2 * kPi;
            if (std::abs(arg - sector * kPi / 2) >= kPi) continue;
            const TruncatedElement lhs = iso.H(sector, r, arg);
            const TruncatedElement rhs = uea::adjoint_exp(log_t, dkz.H(sector, r, arg));
            worst = std::max(worst, (lhs - rhs).max_abs());
        }
    }
    return worst;
}
} // namespace isokz::quantum
