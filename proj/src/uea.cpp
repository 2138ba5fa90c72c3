#include "isokz/uea.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isokz::uea {

namespace {

void require_same_shape(const TruncatedElement& a, const TruncatedElement& b, const char* op)
{
    if (!(a.shape() == b.shape())) {
        throw InvalidInput(std::string(op) + ": shape mismatch " + describe(a.shape()) + " vs " +
                           describe(b.shape()));
    }
}

bool all_zero(const HbarPoly& p)
{
    return std::all_of(p.begin(), p.end(), [](cplx c) { return c == cplx{}; });
}

// Lie bracket of two letters as a sparse combination of letters.
std::vector<std::pair<Letter, long long>> bracket(int n, Letter a, Letter b)
{
    const Generator x = generator_of(n, a);
    const Generator y = generator_of(n, b);
    std::vector<std::pair<Letter, long long>> out;
    if (x.j == y.i) out.emplace_back(letter_of(n, {x.i, y.j}), 1);
    if (y.j == x.i) out.emplace_back(letter_of(n, {y.i, x.j}), -1);
    return out;
}

struct StraightenCache {
    int n = -1;
    std::map<Word, std::map<Word, long long>> table;
};

thread_local StraightenCache cache;

// Tensor product of per-slot straightened expansions.
void expand_slots(const std::vector<const std::map<Word, long long>*>& per_slot, std::size_t s,
                  Monomial& current, long long c, std::vector<std::pair<Monomial, long long>>& out)
{
    if (s == per_slot.size()) {
        out.emplace_back(current, c);
        return;
    }
    for (const auto& [w, cw] : *per_slot[s]) {
        current[s] = w;
        expand_slots(per_slot, s + 1, current, c * cw, out);
    }
}

} // namespace

Letter letter_of(int n, Generator g)
{
    if (g.i < 1 || g.i > n || g.j < 1 || g.j > n) {
        throw InvalidInput("generator index out of range: E_" + std::to_string(g.i) + "," +
                           std::to_string(g.j) + " for n = " + std::to_string(n));
    }
    return static_cast<Letter>((g.j - 1) * n + (g.i - 1));
}

Generator generator_of(int n, Letter a)
{
    return {a % n + 1, a / n + 1};
}

std::string describe(const Shape& s)
{
    std::ostringstream os;
    os << "(n=" << s.n << ", arity=" << s.arity << ", N=" << s.hbar_order << ", D=" << s.degree_cap
       << ")";
    return os.str();
}

TruncatedElement::TruncatedElement(Shape shape) : shape_(shape)
{
    if (shape.n < 1 || shape.n > 15) throw InvalidInput("rank n must be in [1, 15]");
    if (shape.arity < 1) throw InvalidInput("arity must be >= 1");
    if (shape.hbar_order < 0) throw InvalidInput("hbar order must be >= 0");
    if (shape.degree_cap < 0) throw InvalidInput("degree cap must be >= 0");
}

TruncatedElement TruncatedElement::zero(Shape shape)
{
    return TruncatedElement(shape);
}

TruncatedElement TruncatedElement::one(Shape shape)
{
    return scalar(shape, 1.0, 0);
}

TruncatedElement TruncatedElement::scalar(Shape shape, cplx c, int hbar_power)
{
    TruncatedElement e(shape);
    e.add_term(Monomial(static_cast<std::size_t>(shape.arity)), hbar_power, c);
    return e;
}

TruncatedElement TruncatedElement::generator(Shape shape, int slot, int i, int j)
{
    TruncatedElement e(shape);
    if (slot < 0 || slot >= shape.arity) throw InvalidInput("slot out of range");
    Monomial m(static_cast<std::size_t>(shape.arity));
    m[static_cast<std::size_t>(slot)] = {letter_of(shape.n, {i, j})};
    e.add_term(m, 0, 1.0);
    return e;
}

cplx TruncatedElement::coeff(const Monomial& m, int k) const
{
    auto it = terms_.find(m);
    if (it == terms_.end() || k < 0 || k > shape_.hbar_order) return {};
    return it->second[static_cast<std::size_t>(k)];
}

void TruncatedElement::add_term(const Monomial& m, int k, cplx c)
{
    if (k > shape_.hbar_order || c == cplx{}) return;
    for (const auto& w : m) {
        if (static_cast<int>(w.size()) > shape_.degree_cap) {
            lossy_ = true;
            return;
        }
    }
    auto [it, inserted] = terms_.try_emplace(m);
    if (inserted) it->second.assign(static_cast<std::size_t>(shape_.hbar_order) + 1, cplx{});
    it->second[static_cast<std::size_t>(k)] += c;
    if (all_zero(it->second)) terms_.erase(it);
}

void TruncatedElement::add_term(const Monomial& m, const HbarPoly& p)
{
    for (std::size_t k = 0; k < p.size(); ++k) add_term(m, static_cast<int>(k), p[k]);
}

void TruncatedElement::canonicalize(double threshold)
{
    for (auto it = terms_.begin(); it != terms_.end();) {
        for (auto& c : it->second) {
            if (std::abs(c) <= threshold) c = {};
        }
        if (all_zero(it->second)) {
            it = terms_.erase(it);
        } else {
            ++it;
        }
    }
}

TruncatedElement TruncatedElement::hbar_part(int k) const
{
    TruncatedElement out(shape_);
    out.lossy_ = lossy_;
    for (const auto& [m, p] : terms_) out.add_term(m, 0, p[static_cast<std::size_t>(k)]);
    return out;
}

double TruncatedElement::max_abs() const
{
    double r = 0.0;
    for (const auto& [m, p] : terms_) {
        for (auto c : p) r = std::max(r, std::abs(c));
    }
    return r;
}

double TruncatedElement::max_abs(int k) const
{
    double r = 0.0;
    for (const auto& [m, p] : terms_) r = std::max(r, std::abs(p[static_cast<std::size_t>(k)]));
    return r;
}

TruncatedElement& TruncatedElement::operator+=(const TruncatedElement& o)
{
    require_same_shape(*this, o, "add");
    for (const auto& [m, p] : o.terms_) add_term(m, p);
    lossy_ = lossy_ || o.lossy_;
    return *this;
}

TruncatedElement& TruncatedElement::operator-=(const TruncatedElement& o)
{
    require_same_shape(*this, o, "subtract");
    for (const auto& [m, p] : o.terms_) {
        for (std::size_t k = 0; k < p.size(); ++k) add_term(m, static_cast<int>(k), -p[k]);
    }
    lossy_ = lossy_ || o.lossy_;
    return *this;
}

TruncatedElement& TruncatedElement::operator*=(cplx c)
{
    if (c == cplx{}) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, p] : terms_) {
        for (auto& x : p) x *= c;
    }
    canonicalize();
    return *this;
}

TruncatedElement operator+(TruncatedElement a, const TruncatedElement& b)
{
    a += b;
    return a;
}

TruncatedElement operator-(TruncatedElement a, const TruncatedElement& b)
{
    a -= b;
    return a;
}

TruncatedElement operator-(TruncatedElement a)
{
    a *= -1.0;
    return a;
}

TruncatedElement operator*(cplx c, TruncatedElement a)
{
    a *= c;
    return a;
}

TruncatedElement operator*(const TruncatedElement& a, const TruncatedElement& b)
{
    return normal_order_product(a, b);
}

TruncatedElement hbar_shift(const TruncatedElement& a, int k)
{
    TruncatedElement out(a.shape());
    if (a.lossy()) out.mark_lossy();
    for (const auto& [m, p] : a.terms()) {
        for (std::size_t j = 0; j < p.size(); ++j) out.add_term(m, static_cast<int>(j) + k, p[j]);
    }
    return out;
}

TruncatedElement rescale_hbar(const TruncatedElement& a, cplx c)
{
    TruncatedElement out(a.shape());
    if (a.lossy()) out.mark_lossy();
    for (const auto& [m, p] : a.terms()) {
        cplx f = 1.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            out.add_term(m, static_cast<int>(j), f * p[j]);
            f *= c;
        }
    }
    return out;
}

TruncatedElement reshape(const TruncatedElement& a, int hbar_order, int degree_cap)
{
    Shape s = a.shape();
    s.hbar_order = hbar_order;
    s.degree_cap = degree_cap;
    TruncatedElement out(s);
    if (a.lossy()) out.mark_lossy();
    for (const auto& [m, p] : a.terms()) out.add_term(m, p);
    return out;
}

const std::map<Word, long long>& straighten(int n, const Word& w)
{
    if (cache.n != n) {
        cache.table.clear();
        cache.n = n;
    }
    if (auto it = cache.table.find(w); it != cache.table.end()) return it->second;

    std::map<Word, long long> result;
    auto pos = std::adjacent_find(w.begin(), w.end(), [](Letter x, Letter y) { return x > y; });
    if (pos == w.end()) {
        result.emplace(w, 1);
    } else {
        const auto p = static_cast<std::size_t>(pos - w.begin());
        // w = ... a b ... with a > b:  a b = b a + [a, b].
        Word swapped = w;
        std::swap(swapped[p], swapped[p + 1]);
        for (const auto& [v, c] : straighten(n, swapped)) result[v] += c;
        for (const auto& [letter, c] : bracket(n, w[p], w[p + 1])) {
            Word shorter;
            shorter.reserve(w.size() - 1);
            shorter.insert(shorter.end(), w.begin(), w.begin() + static_cast<long>(p));
            shorter.push_back(letter);
            shorter.insert(shorter.end(), w.begin() + static_cast<long>(p) + 2, w.end());
            for (const auto& [v, cv] : straighten(n, shorter)) result[v] += c * cv;
        }
        std::erase_if(result, [](const auto& kv) { return kv.second == 0; });
    }
    return cache.table.emplace(w, std::move(result)).first->second;
}

TruncatedElement normal_order_product(const TruncatedElement& a, const TruncatedElement& b)
{
    require_same_shape(a, b, "normal_order_product");
    const Shape& s = a.shape();
    const auto N = static_cast<std::size_t>(s.hbar_order);
    TruncatedElement out(s);
    if (a.lossy() || b.lossy()) out.mark_lossy();

    std::vector<const std::map<Word, long long>*> per_slot(static_cast<std::size_t>(s.arity));
    std::vector<std::pair<Monomial, long long>> expanded;
    HbarPoly poly(N + 1);
    Monomial current(static_cast<std::size_t>(s.arity));

    for (const auto& [ma, pa] : a.terms()) {
        for (const auto& [mb, pb] : b.terms()) {
            bool any = false;
            for (std::size_t k = 0; k <= N; ++k) {
                cplx acc{};
                for (std::size_t i = 0; i <= k; ++i) acc += pa[i] * pb[k - i];
                poly[k] = acc;
                any = any || acc != cplx{};
            }
            if (!any) continue;
            for (std::size_t slot = 0; slot < per_slot.size(); ++slot) {
                Word w = ma[slot];
                w.insert(w.end(), mb[slot].begin(), mb[slot].end());
                per_slot[slot] = &straighten(s.n, w);
            }
            expanded.clear();
            expand_slots(per_slot, 0, current, 1, expanded);
            for (const auto& [m, c] : expanded) {
                for (std::size_t k = 0; k <= N; ++k) {
                    if (poly[k] != cplx{}) out.add_term(m, static_cast<int>(k), static_cast<double>(c) * poly[k]);
                }
            }
        }
    }
    return out;
}

TruncatedElement commutator(const TruncatedElement& a, const TruncatedElement& b)
{
    require_same_shape(a, b, "commutator");
    const Shape& s = a.shape();
    const auto N = static_cast<std::size_t>(s.hbar_order);
    TruncatedElement out(s);
    if (a.lossy() || b.lossy()) out.mark_lossy();

    // [m_a, m_b] is expanded with integer coefficients before any floating
    // point scaling, so terms that cancel algebraically cancel exactly. This
    // keeps degree and admissibility bounds structural instead of approximate.
    const auto arity = static_cast<std::size_t>(s.arity);
    std::vector<const std::map<Word, long long>*> left(arity), right(arity);
    std::vector<std::pair<Monomial, long long>> expanded;
    std::map<Monomial, long long> diff;
    HbarPoly poly(N + 1);
    Monomial current(arity);

    for (const auto& [ma, pa] : a.terms()) {
        for (const auto& [mb, pb] : b.terms()) {
            bool any = false;
            for (std::size_t k = 0; k <= N; ++k) {
                cplx acc{};
                for (std::size_t i = 0; i <= k; ++i) acc += pa[i] * pb[k - i];
                poly[k] = acc;
                any = any || acc != cplx{};
            }
            if (!any) continue;
            for (std::size_t slot = 0; slot < arity; ++slot) {
                Word ab = ma[slot];
                ab.insert(ab.end(), mb[slot].begin(), mb[slot].end());
                Word ba = mb[slot];
                ba.insert(ba.end(), ma[slot].begin(), ma[slot].end());
                left[slot] = &straighten(s.n, ab);
                right[slot] = &straighten(s.n, ba);
            }
            diff.clear();
            expanded.clear();
            expand_slots(left, 0, current, 1, expanded);
            for (const auto& [m, c] : expanded) diff[m] += c;
            expanded.clear();
            expand_slots(right, 0, current, 1, expanded);
            for (const auto& [m, c] : expanded) diff[m] -= c;
            for (const auto& [m, c] : diff) {
                if (c == 0) continue;
                for (std::size_t k = 0; k <= N; ++k) {
                    if (poly[k] != cplx{}) out.add_term(m, static_cast<int>(k), static_cast<double>(c) * poly[k]);
                }
            }
        }
    }
    return out;
}

TruncatedElement casimir(int n, int hbar_order, int degree_cap)
{
    TruncatedElement out(Shape{n, 2, hbar_order, degree_cap});
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            out.add_term(Monomial{{letter_of(n, {i, j})}, {letter_of(n, {j, i})}}, 0, 1.0);
        }
    }
    return out;
}

TruncatedElement cartan_casimir(int n, int hbar_order, int degree_cap)
{
    TruncatedElement out(Shape{n, 2, hbar_order, degree_cap});
    for (int i = 1; i <= n; ++i) {
        out.add_term(Monomial{{letter_of(n, {i, i})}, {letter_of(n, {i, i})}}, 0, 1.0);
    }
    return out;
}

TruncatedElement kappa(int n, int i, int j, int hbar_order, int degree_cap)
{
    if (i == j) throw InvalidInput("kappa requires i != j");
    const Shape s{n, 1, hbar_order, degree_cap};
    const auto eij = TruncatedElement::generator(s, 0, i, j);
    const auto eji = TruncatedElement::generator(s, 0, j, i);
    return eij * eji + eji * eij;
}

TruncatedElement root_pair_casimir(int n, int i, int j, int hbar_order, int degree_cap)
{
    if (i == j) throw InvalidInput("root_pair_casimir requires i != j");
    TruncatedElement out(Shape{n, 2, hbar_order, degree_cap});
    const Letter a = letter_of(n, {i, j});
    const Letter b = letter_of(n, {j, i});
    out.add_term(Monomial{{a}, {b}}, 0, 1.0);
    out.add_term(Monomial{{b}, {a}}, 0, 1.0);
    return out;
}

TruncatedElement embed_slots(const TruncatedElement& a, std::span<const int> mapping, int total)
{
    if (static_cast<int>(mapping.size()) != a.arity()) {
        throw InvalidInput("embed_slots: mapping size must equal the arity");
    }
    for (int t : mapping) {
        if (t < 0 || t >= total) throw InvalidInput("embed_slots: target slot out of range");
    }
    Shape s = a.shape();
    s.arity = total;
    TruncatedElement out(s);
    if (a.lossy()) out.mark_lossy();
    for (const auto& [m, p] : a.terms()) {
        Monomial mm(static_cast<std::size_t>(total));
        for (std::size_t k = 0; k < mapping.size(); ++k) mm[static_cast<std::size_t>(mapping[k])] = m[k];
        out.add_term(mm, p);
    }
    return out;
}

TruncatedElement embed_slot(const TruncatedElement& a, int position, int total)
{
    std::vector<int> mapping(static_cast<std::size_t>(a.arity()));
    for (int k = 0; k < a.arity(); ++k) mapping[static_cast<std::size_t>(k)] = position + k;
    return embed_slots(a, mapping, total);
}

TruncatedElement coproduct(const TruncatedElement& a, int slot)
{
    if (slot < 0 || slot >= a.arity()) throw InvalidInput("coproduct: slot out of range");
    Shape s = a.shape();
    s.arity += 1;
    TruncatedElement out(s);
    if (a.lossy()) out.mark_lossy();
    const auto sl = static_cast<std::size_t>(slot);
    for (const auto& [m, p] : a.terms()) {
        const Word& w = m[sl];
        const std::size_t len = w.size();
        // Every subsequence of a sorted word is sorted, so each of the 2^len
        // splits is already in normal order.
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << len); ++mask) {
            Word left;
            Word right;
            for (std::size_t k = 0; k < len; ++k) {
                ((mask >> k) & 1U ? right : left).push_back(w[k]);
            }
            Monomial mm;
            mm.reserve(m.size() + 1);
            mm.insert(mm.end(), m.begin(), m.begin() + static_cast<long>(sl));
            mm.push_back(std::move(left));
            mm.push_back(std::move(right));
            mm.insert(mm.end(), m.begin() + static_cast<long>(sl) + 1, m.end());
            out.add_term(mm, p);
        }
    }
    return out;
}

double weight(int n, const Word& w, std::span<const double> u)
{
    double r = 0.0;
    for (Letter a : w) {
        const Generator g = generator_of(n, a);
        r += u[static_cast<std::size_t>(g.i - 1)] - u[static_cast<std::size_t>(g.j - 1)];
    }
    return r;
}

TruncatedElement ad_cartan(const TruncatedElement& a, std::span<const double> u, int slot)
{
    if (static_cast<int>(u.size()) != a.n()) throw InvalidInput("ad_cartan: u has wrong length");
    TruncatedElement out(a.shape());
    if (a.lossy()) out.mark_lossy();
    for (const auto& [m, p] : a.terms()) {
        const double wgt = weight(a.n(), m[static_cast<std::size_t>(slot)], u);
        for (std::size_t k = 0; k < p.size(); ++k) out.add_term(m, static_cast<int>(k), wgt * p[k]);
    }
    return out;
}

TruncatedElement exp_ad_cartan(const TruncatedElement& a, std::span<const double> u, int slot, cplx c)
{
    if (static_cast<int>(u.size()) != a.n()) throw InvalidInput("exp_ad_cartan: u has wrong length");
    TruncatedElement out(a.shape());
    if (a.lossy()) out.mark_lossy();
    for (const auto& [m, p] : a.terms()) {
        const cplx f = std::exp(c * weight(a.n(), m[static_cast<std::size_t>(slot)], u));
        for (std::size_t k = 0; k < p.size(); ++k) out.add_term(m, static_cast<int>(k), f * p[k]);
    }
    return out;
}

namespace {

void require_hbar_divisible(const TruncatedElement& a, const char* op)
{
    if (a.max_abs(0) != 0.0) {
        throw InvalidInput(std::string(op) + ": argument must vanish modulo hbar");
    }
}

} // namespace

TruncatedElement exp_series(const TruncatedElement& a)
{
    require_hbar_divisible(a, "exp_series");
    TruncatedElement result = TruncatedElement::one(a.shape());
    TruncatedElement power = result;
    for (int k = 1; k <= a.hbar_order(); ++k) {
        power = (1.0 / k) * (power * a);
        result += power;
    }
    if (a.lossy()) result.mark_lossy();
    return result;
}

TruncatedElement log_series(const TruncatedElement& a)
{
    TruncatedElement x = a - TruncatedElement::one(a.shape());
    require_hbar_divisible(x, "log_series");
    TruncatedElement result(a.shape());
    TruncatedElement power = TruncatedElement::one(a.shape());
    for (int k = 1; k <= a.hbar_order(); ++k) {
        power = power * x;
        result += ((k % 2 == 1 ? 1.0 : -1.0) / k) * power;
    }
    if (a.lossy()) result.mark_lossy();
    return result;
}

TruncatedElement invert(const TruncatedElement& a)
{
    const Monomial unit(static_cast<std::size_t>(a.arity()));
    const cplx c0 = a.coeff(unit, 0);
    TruncatedElement x = a - TruncatedElement::scalar(a.shape(), c0);
    if (c0 == cplx{} || x.max_abs(0) != 0.0) {
        throw InvalidInput("invert: the hbar^0 part must be a nonzero scalar");
    }
    x *= 1.0 / c0;
    // (c0 (1 + x))^{-1} = c0^{-1} sum (-x)^k
    TruncatedElement result = TruncatedElement::one(a.shape());
    TruncatedElement power = result;
    for (int k = 1; k <= a.hbar_order(); ++k) {
        power = -(power * x);
        result += power;
    }
    result *= 1.0 / c0;
    if (a.lossy()) result.mark_lossy();
    return result;
}

TruncatedElement conjugate(const TruncatedElement& t, const TruncatedElement& a)
{
    return invert(t) * a * t;
}

TruncatedElement adjoint_exp(const TruncatedElement& e, const TruncatedElement& a)
{
    require_hbar_divisible(e, "adjoint_exp");
    // exp(-E) a exp(E) = sum_k (-ad E)^k a / k!
    TruncatedElement result = a;
    TruncatedElement term = a;
    for (int k = 1; k <= a.hbar_order(); ++k) {
        term = (-1.0 / k) * commutator(e, term);
        if (term.is_zero()) break;
        result += term;
    }
    return result;
}

FiltrationProfile::FiltrationProfile(std::vector<int> orders) : orders_(std::move(orders))
{
    if (orders_.empty()) throw InvalidInput("filtration profile must be non-empty");
    for (int o : orders_) {
        if (o < 0) throw InvalidInput("filtration orders must be non-negative");
    }
    if (orders_.size() > 1 && orders_[1] < 2) throw InvalidInput("filtration profile needs o_1 >= 2");
    for (std::size_t k = 0; k < orders_.size(); ++k) {
        for (std::size_t l = 0; k + l < orders_.size(); ++l) {
            if (orders_[k] + orders_[l] > orders_[k + l]) {
                throw InvalidInput("filtration profile must be subadditive");
            }
        }
    }
}

FiltrationProfile FiltrationProfile::magnus(int hbar_order)
{
    std::vector<int> o(static_cast<std::size_t>(hbar_order) + 1);
    for (int k = 1; k <= hbar_order; ++k) o[static_cast<std::size_t>(k)] = k + 1;
    return FiltrationProfile(std::move(o), Unchecked{});
}

int FiltrationProfile::at(int k) const
{
    // Beyond the stored range the last increment is extended linearly.
    const auto sz = static_cast<int>(orders_.size());
    if (k < sz) return orders_[static_cast<std::size_t>(k)];
    const int step = sz > 1 ? orders_.back() - orders_[orders_.size() - 2] : 0;
    return orders_.back() + step * (k - sz + 1);
}

int total_degree(const Monomial& m)
{
    int d = 0;
    for (const auto& w : m) d += static_cast<int>(w.size());
    return d;
}

bool filtration_check(const TruncatedElement& a, const FiltrationProfile& o)
{
    for (const auto& [m, p] : a.terms()) {
        const int d = total_degree(m);
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] != cplx{} && d > o.at(static_cast<int>(k))) return false;
        }
    }
    return true;
}

std::optional<std::pair<Monomial, int>> find_inadmissible(const TruncatedElement& a, int slot)
{
    if (slot < 0 || slot >= a.arity()) throw InvalidInput("admissibility: slot out of range");
    for (const auto& [m, p] : a.terms()) {
        const auto d = m[static_cast<std::size_t>(slot)].size();
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] != cplx{} && d > k) return std::make_pair(m, static_cast<int>(k));
        }
    }
    return std::nullopt;
}

bool admissibility_check(const TruncatedElement& a, int slot)
{
    return !find_inadmissible(a, slot).has_value();
}

MatrixC HbarMatrix::evaluate(cplx hbar) const
{
    MatrixC out = MatrixC::Zero(dim(), dim());
    cplx f = 1.0;
    for (const auto& c : coeffs) {
        out += f * c;
        f *= hbar;
    }
    return out;
}

HbarMatrix operator*(const HbarMatrix& a, const HbarMatrix& b)
{
    const int N = std::min(a.order(), b.order());
    HbarMatrix out;
    out.coeffs.assign(static_cast<std::size_t>(N) + 1, MatrixC::Zero(a.dim(), a.dim()));
    for (int k = 0; k <= N; ++k) {
        for (int i = 0; i <= k; ++i) {
            out.coeffs[static_cast<std::size_t>(k)] +=
                a.coeffs[static_cast<std::size_t>(i)] * b.coeffs[static_cast<std::size_t>(k - i)];
        }
    }
    return out;
}

HbarMatrix operator-(const HbarMatrix& a, const HbarMatrix& b)
{
    HbarMatrix out = a;
    for (std::size_t k = 0; k < out.coeffs.size() && k < b.coeffs.size(); ++k) out.coeffs[k] -= b.coeffs[k];
    return out;
}

HbarMatrix evaluation_rep(const TruncatedElement& a)
{
    const int n = a.n();
    Eigen::Index dim = 1;
    for (int s = 0; s < a.arity(); ++s) dim *= n;
    HbarMatrix out;
    out.coeffs.assign(static_cast<std::size_t>(a.hbar_order()) + 1, MatrixC::Zero(dim, dim));

    for (const auto& [m, p] : a.terms()) {
        MatrixC block = MatrixC::Identity(1, 1);
        for (const auto& w : m) {
            MatrixC f = MatrixC::Identity(n, n);
            for (Letter x : w) {
                const Generator g = generator_of(n, x);
                MatrixC e = MatrixC::Zero(n, n);
                e(g.i - 1, g.j - 1) = 1.0;
                f = f * e;
            }
            MatrixC k(block.rows() * n, block.cols() * n);
            for (Eigen::Index r = 0; r < block.rows(); ++r) {
                for (Eigen::Index c = 0; c < block.cols(); ++c) {
                    k.block(r * n, c * n, n, n) = block(r, c) * f;
                }
            }
            block = std::move(k);
        }
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] != cplx{}) out.coeffs[k] += p[k] * block;
        }
    }
    return out;
}

std::string to_string(const TruncatedElement& a)
{
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, p] : a.terms()) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] == cplx{}) continue;
            if (!first) os << " + ";
            first = false;
            os << "(" << p[k].real();
            if (p[k].imag() != 0.0) os << (p[k].imag() < 0 ? "-" : "+") << std::abs(p[k].imag()) << "i";
            os << ")";
            if (k > 0) os << "h^" << k;
            for (std::size_t s = 0; s < m.size(); ++s) {
                os << (s == 0 ? " " : "(x)");
                if (m[s].empty()) os << "1";
                for (Letter x : m[s]) {
                    const Generator g = generator_of(a.n(), x);
                    os << "E" << g.i << g.j;
                }
            }
        }
    }
    if (first) os << "0";
    return os.str();
}

} // namespace isokz::uea
