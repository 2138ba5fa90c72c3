#include "isokz/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace isokz::semiclassical {

namespace {

Word merge(const Word& a, const Word& b)
{
    Word out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

void require_compatible(const SclFunction& a, const SclFunction& b)
{
    if (a.n() != b.n() || a.arity() != b.arity() || a.degree_cap() != b.degree_cap() ||
        a.symmetric_cap() != b.symmetric_cap()) {
        throw InvalidInput("scl functions have different shapes");
    }
}

} // namespace

SclFunction::SclFunction(int n, int arity, int degree_cap, int symmetric_cap)
    : n_(n), arity_(arity), degree_cap_(degree_cap), symmetric_cap_(symmetric_cap)
{
    if (n < 1 || arity < 1 || degree_cap < 0 || symmetric_cap < 0) throw InvalidInput("invalid scl shape");
}

void SclFunction::add_term(const Monomial& m, Word sym, cplx c)
{
    if (c == cplx(0)) return;
    if (static_cast<int>(sym.size()) > symmetric_cap_) return;
    for (const auto& w : m) {
        if (static_cast<int>(w.size()) > degree_cap_) {
            lossy_ = true;
            return;
        }
    }
    std::sort(sym.begin(), sym.end());
    auto [it, fresh] = terms_.try_emplace(Key{m, std::move(sym)}, c);
    if (!fresh) {
        it->second += c;
        if (it->second == cplx(0)) terms_.erase(it);
    }
}

cplx SclFunction::coeff(const Monomial& m, const Word& sym) const
{
    const auto it = terms_.find(Key{m, sym});
    return it == terms_.end() ? cplx(0) : it->second;
}

double SclFunction::max_abs() const
{
    double r = 0.0;
    for (const auto& [k, c] : terms_) r = std::max(r, std::abs(c));
    return r;
}

SclFunction& SclFunction::operator+=(const SclFunction& o)
{
    require_compatible(*this, o);
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
    lossy_ = lossy_ || o.lossy_;
    return *this;
}

SclFunction& SclFunction::operator-=(const SclFunction& o)
{
    require_compatible(*this, o);
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
    lossy_ = lossy_ || o.lossy_;
    return *this;
}

SclFunction operator+(SclFunction a, const SclFunction& b) { return a += b; }
SclFunction operator-(SclFunction a, const SclFunction& b) { return a -= b; }

SclFunction operator*(cplx c, SclFunction a)
{
    SclFunction out(a.n(), a.arity(), a.degree_cap(), a.symmetric_cap());
    for (const auto& [k, v] : a.terms()) out.add_term(k.first, k.second, c * v);
    if (a.lossy()) out.mark_lossy();
    return out;
}

SclFunction operator*(const SclFunction& a, const SclFunction& b)
{
    require_compatible(a, b);
    SclFunction out(a.n(), a.arity(), a.degree_cap(), a.symmetric_cap());
    if (a.lossy() || b.lossy()) out.mark_lossy();
    const auto arity = static_cast<std::size_t>(a.arity());
    for (const auto& [ka, ca] : a.terms()) {
        for (const auto& [kb, cb] : b.terms()) {
            if (static_cast<int>(ka.second.size() + kb.second.size()) > a.symmetric_cap()) continue;
            const Word sym = merge(ka.second, kb.second);
            // straighten each slot and expand the tensor product of the results
            std::vector<std::pair<Monomial, cplx>> acc{{Monomial{}, ca * cb}};
            for (std::size_t s = 0; s < arity; ++s) {
                Word w = ka.first[s];
                w.insert(w.end(), kb.first[s].begin(), kb.first[s].end());
                const auto& st = uea::straighten(a.n(), w);
                std::vector<std::pair<Monomial, cplx>> next;
                for (const auto& [m, c] : acc)
                    for (const auto& [sw, k] : st) {
                        Monomial mm = m;
                        mm.push_back(sw);
                        next.emplace_back(std::move(mm), c * static_cast<double>(k));
                    }
                acc = std::move(next);
            }
            for (const auto& [m, c] : acc) out.add_term(m, sym, c);
        }
    }
    return out;
}

SclFunction scl(const TruncatedElement& a, int slot)
{
    if (a.arity() != 2 || slot != 1) throw InvalidInput("scl: expects an arity-2 element with slot 1 commutative");
    if (const auto bad = uea::find_inadmissible(a, slot)) {
        std::ostringstream os;
        os << "scl: term of slot-" << slot << " degree " << bad->first[static_cast<std::size_t>(slot)].size()
           << " at hbar^" << bad->second << " is not admissible";
        throw InvalidInput(os.str());
    }
    SclFunction out(a.n(), 1, a.degree_cap(), a.hbar_order());
    if (a.lossy()) out.mark_lossy();
    for (const auto& [m, p] : a.terms()) {
        const std::size_t d = m[1].size();
        if (d < p.size() && p[d] != cplx(0)) out.add_term(Monomial{m[0]}, m[1], p[d]);
    }
    return out;
}

SclFunction embed_slots(const SclFunction& f, std::span<const int> mapping, int total)
{
    if (static_cast<int>(mapping.size()) != f.arity()) throw InvalidInput("embed_slots: mapping size mismatch");
    SclFunction out(f.n(), total, f.degree_cap(), f.symmetric_cap());
    if (f.lossy()) out.mark_lossy();
    for (const auto& [k, c] : f.terms()) {
        Monomial m(static_cast<std::size_t>(total));
        for (std::size_t s = 0; s < mapping.size(); ++s) m[static_cast<std::size_t>(mapping[s])] = k.first[s];
        out.add_term(m, k.second, c);
    }
    return out;
}

SclFunction coproduct(const SclFunction& f, int slot)
{
    if (slot < 0 || slot >= f.arity()) throw InvalidInput("coproduct: slot out of range");
    SclFunction out(f.n(), f.arity() + 1, f.degree_cap(), f.symmetric_cap());
    if (f.lossy()) out.mark_lossy();
    const auto sl = static_cast<std::size_t>(slot);
    for (const auto& [k, c] : f.terms()) {
        const Word& w = k.first[sl];
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << w.size()); ++mask) {
            Word left;
            Word right;
            for (std::size_t b = 0; b < w.size(); ++b) ((mask >> b) & 1U ? right : left).push_back(w[b]);
            Monomial m;
            m.insert(m.end(), k.first.begin(), k.first.begin() + static_cast<long>(sl));
            m.push_back(std::move(left));
            m.push_back(std::move(right));
            m.insert(m.end(), k.first.begin() + static_cast<long>(sl) + 1, k.first.end());
            out.add_term(m, k.second, c);
        }
    }
    return out;
}

namespace {

cplx symbol_value(int n, const Word& sym, const MatrixC& v0)
{
    cplx r = 1.0;
    for (uea::Letter x : sym) {
        const uea::Generator g = uea::generator_of(n, x);
        r *= v0(g.j - 1, g.i - 1);
    }
    return r;
}

} // namespace

TruncatedElement evaluate(const SclFunction& f, const MatrixC& v0)
{
    if (v0.rows() != f.n() || v0.cols() != f.n()) throw InvalidInput("evaluate: V0 has the wrong size");
    TruncatedElement out(uea::Shape{f.n(), f.arity(), 0, f.degree_cap()});
    if (f.lossy()) out.mark_lossy();
    for (const auto& [k, c] : f.terms()) out.add_term(k.first, 0, c * symbol_value(f.n(), k.second, v0));
    return out;
}

MatrixC evaluate_matrix(const SclFunction& f, const MatrixC& v0)
{
    return uea::evaluation_rep(evaluate(f, v0)).coeffs.front();
}

double primitivity_residual(const SclFunction& f)
{
    if (f.arity() != 1) throw InvalidInput("primitivity: arity-1 function expected");
    const std::vector<int> m13{0};
    const std::vector<int> m23{1};
    const SclFunction d = coproduct(f, 0) - embed_slots(f, m13, 2) - embed_slots(f, m23, 2);
    return d.max_abs();
}

double grouplike_residual(const SclFunction& f)
{
    if (f.arity() != 1) throw InvalidInput("grouplike: arity-1 function expected");
    const std::vector<int> m13{0};
    const std::vector<int> m23{1};
    const SclFunction d = coproduct(f, 0) - embed_slots(f, m13, 2) * embed_slots(f, m23, 2);
    return d.max_abs();
}

Scaling make_scaling(std::vector<double> scales, std::vector<double> errors)
{
    if (scales.size() != errors.size() || scales.size() < 2) throw InvalidInput("scaling fit needs two or more scales");
    Scaling s;
    s.scales = std::move(scales);
    s.errors = std::move(errors);
    double mx = 0, my = 0;
    const double m = static_cast<double>(s.scales.size());
    for (std::size_t k = 0; k < s.scales.size(); ++k) {
        if (!(s.errors[k] > 0)) {
            s.exponent = std::numeric_limits<double>::quiet_NaN();
            return s;
        }
        mx += std::log(s.scales[k]) / m;
        my += std::log(s.errors[k]) / m;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < s.scales.size(); ++k) {
        const double dx = std::log(s.scales[k]) - mx;
        sxy += dx * (std::log(s.errors[k]) - my);
        sxx += dx * dx;
    }
    s.exponent = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    return s;
}

namespace {

MatrixC classical_v(const isomonodromy::CartanPath& path, const MatrixC& v0, const isomonodromy::FlowOptions& flow)
{
    const double L = path.length();
    if (path.waypoints.size() < 2 || L == 0.0) return v0;
    return isomonodromy::integrate_iso_flow(path, v0, {L}, flow).back().V;
}

TruncatedElement omega_at(const isomonodromy::CartanPath& path, const uea::Shape& shape,
                          const quantum::MagnusOptions& magnus)
{
    return quantum::iso_casimir_along(path, shape, magnus);
}

bool in_supersector(int sector, double arg) { return std::abs(arg - sector * kPi / 2) < kPi; }

} // namespace

CasimirCheck scl_casimir_check(const isomonodromy::CartanPath& path, const MatrixC& v0, const uea::Shape& shape,
                               const std::vector<double>& scales, const quantum::MagnusOptions& magnus,
                               const isomonodromy::FlowOptions& flow)
{
    isomonodromy::validate(path);
    const SclFunction I = scl(uea::hbar_shift(omega_at(path, shape, magnus), 1));
    CasimirCheck out;
    std::vector<double> err;
    for (double t : scales) {
        const MatrixC q = evaluate_matrix(I, t * v0);
        const MatrixC c = classical_v(path, t * v0, flow);
        err.push_back((q - c).cwiseAbs().maxCoeff());
        if (err.size() == 1) {
            out.quantum = q;
            out.classical = c;
        }
    }
    out.scaling = make_scaling(scales, std::move(err));
    return out;
}

std::vector<SolutionRow> scl_solution_check(const isomonodromy::CartanPath& path, const MatrixC& v0,
                                            const std::vector<cplx>& z_samples, const uea::Shape& shape,
                                            const std::vector<double>& scales, const quantum::QuantumOptions& qopt,
                                            const classical::Options& copt)
{
    isomonodromy::validate(path);
    const VectorR u = path.waypoints.back();
    const std::vector<double> us(u.data(), u.data() + u.size());
    const quantum::QuantumSectorSolutions qs(us, omega_at(path, shape, qopt.magnus), quantum::sectorial_options(qopt));

    std::vector<classical::SectorSolutions> cs;
    for (double t : scales) {
        classical::IrregularSystem sys;
        sys.u = u.cast<cplx>();
        sys.V = classical_v(path, t * v0, {});
        cs.emplace_back(sys, copt);
    }

    std::vector<SolutionRow> out;
    for (const cplx z : z_samples) {
        const double r = std::abs(z);
        for (int sector : {1, -1}) {
            double arg = std::arg(z);
            if (!in_supersector(sector, arg)) arg += sector * 2 * kPi;
            if (!in_supersector(sector, arg)) continue;
            const SclFunction f = scl(qs.H(sector, r, arg));
            std::vector<double> err;
            for (std::size_t h = 0; h < scales.size(); ++h) {
                err.push_back((evaluate_matrix(f, scales[h] * v0) - cs[h].H(sector, r, arg)).cwiseAbs().maxCoeff());
            }
            out.push_back({z, sector, make_scaling(scales, std::move(err))});
        }
    }
    return out;
}

namespace {

// Quantum order q, commutative monomial -> n x n matrix.
using Graded = std::map<std::pair<int, Word>, MatrixC>;

Graded graded(const TruncatedElement& h)
{
    Graded g;
    const int n = h.n();
    for (const auto& [m, p] : h.terms()) {
        MatrixC rep = MatrixC::Identity(n, n);
        for (uea::Letter x : m[0]) {
            const uea::Generator gen = uea::generator_of(n, x);
            MatrixC e = MatrixC::Zero(n, n);
            e(gen.i - 1, gen.j - 1) = 1.0;
            rep = rep * e;
        }
        const int d = static_cast<int>(m[1].size());
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] == cplx(0)) continue;
            const int q = static_cast<int>(k) - d;
            if (q < 0) throw InvalidInput("conjecture probe: element is not admissible");
            auto [it, fresh] = g.try_emplace({q, m[1]}, MatrixC::Zero(n, n));
            it->second += p[k] * rep;
        }
    }
    return g;
}

} // namespace

std::vector<ProbeRow> givental_conjecture_probe(const isomonodromy::CartanPath& path, const MatrixC& v0,
                                                const std::vector<cplx>& z_samples, const uea::Shape& shape,
                                                const quantum::QuantumOptions& qopt)
{
    isomonodromy::validate(path);
    if ((v0 + v0.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidInput("conjecture probe: V0 must be skew-symmetric");
    }
    const int n = shape.n;
    const int N = shape.hbar_order;
    const VectorR u = path.waypoints.back();
    const std::vector<double> us(u.data(), u.data() + u.size());
    const quantum::QuantumSectorSolutions qs(us, omega_at(path, shape, qopt.magnus), quantum::sectorial_options(qopt));

    std::vector<ProbeRow> out;
    for (const cplx z : z_samples) {
        if (!(z.imag() > 0)) throw InvalidInput("conjecture probe: samples must lie in the upper half plane");
        const double r = std::abs(z);
        const double a = std::arg(z);
        const Graded hp = graded(qs.H(1, r, a));
        const Graded hm = graded(qs.H(-1, r, a - kPi));
        std::vector<MatrixC> res(static_cast<std::size_t>(N) + 1, MatrixC::Zero(n, n));
        for (const auto& [ka, ma] : hm)
            for (const auto& [kb, mb] : hp) {
                const int q = ka.first + kb.first;
                const int d = static_cast<int>(ka.second.size() + kb.second.size());
                if (q + d > N) continue;
                const Word sym = merge(ka.second, kb.second);
                res[static_cast<std::size_t>(q)] += symbol_value(n, sym, v0) * (ma.transpose() * mb);
            }
        res[0] -= MatrixC::Identity(n, n);
        ProbeRow row{z, {}};
        for (const auto& m : res) row.residual.push_back(m.cwiseAbs().maxCoeff());
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace isokz::semiclassical
