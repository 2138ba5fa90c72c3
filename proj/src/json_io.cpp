#include "isokz/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace isokz::io {

json number(double x, int digits)
{
    if (!std::isfinite(x)) return nullptr;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", std::max(digits, 1) - 1, x);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;  // no negative zero
}

json to_json(cplx z, int digits) { return json::array({number(z.real(), digits), number(z.imag(), digits)}); }

json to_json(const MatrixC& m, int digits)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j), digits));
        out.push_back(std::move(row));
    }
    return out;
}

json to_json(const VectorC& v, int digits)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v[i], digits));
    return out;
}

json to_json(const VectorR& v, int digits)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i], digits));
    return out;
}

json to_json(const std::vector<double>& v, int digits)
{
    json out = json::array();
    for (double x : v) out.push_back(number(x, digits));
    return out;
}

json to_json(const uea::TruncatedElement& a, int digits)
{
    json terms = json::array();
    for (const auto& [m, p] : a.terms()) {
        json mono = json::array();
        for (const auto& w : m) {
            json slot = json::array();
            for (uea::Letter x : w) {
                const uea::Generator g = uea::generator_of(a.n(), x);
                slot.push_back({g.i, g.j});
            }
            mono.push_back(std::move(slot));
        }
        json coeffs = json::array();
        for (int k = 0; k <= a.hbar_order(); ++k) {
            coeffs.push_back(to_json(static_cast<std::size_t>(k) < p.size() ? p[static_cast<std::size_t>(k)] : cplx(0),
                                     digits));
        }
        terms.push_back({{"monomial", std::move(mono)}, {"coeffs", std::move(coeffs)}});
    }
    return {{"n", a.n()},
            {"arity", a.arity()},
            {"hbar_order", a.hbar_order()},
            {"degree_cap", a.degree_cap()},
            {"lossy", a.lossy()},
            {"terms", std::move(terms)}};
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw InvalidInput("invalid JSON input: " + what); }

double real_of(const json& j, const std::string& what)
{
    if (!j.is_number()) bad(what + " must be a number");
    return j.get<double>();
}

int int_of(const json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_number_integer()) bad(std::string("missing integer field '") + key + "'");
    return j.at(key).get<int>();
}

} // namespace

cplx complex_from_json(const json& j)
{
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {real_of(j[0], "real part"), real_of(j[1], "imaginary part")};
    bad("complex numbers are written as a number or [re, im]");
}

MatrixC matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty()) bad("matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array()) bad("matrix rows must be arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    MatrixC m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad("matrix rows must have equal length");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

VectorC cvector_from_json(const json& j)
{
    if (!j.is_array()) bad("vector must be an array");
    VectorC v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
    return v;
}

VectorR rvector_from_json(const json& j)
{
    if (!j.is_array()) bad("vector must be an array");
    VectorR v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = real_of(j[i], "vector entry");
    return v;
}

uea::TruncatedElement element_from_json(const json& j)
{
    if (!j.is_object()) bad("element must be an object");
    uea::Shape s{int_of(j, "n"), int_of(j, "arity"), int_of(j, "hbar_order"), int_of(j, "degree_cap")};
    if (s.n < 1 || s.arity < 1 || s.hbar_order < 0 || s.degree_cap < 0) bad("element shape out of range");
    uea::TruncatedElement a(s);
    if (!j.contains("terms") || !j.at("terms").is_array()) bad("element needs a 'terms' array");
    for (const json& t : j.at("terms")) {
        if (!t.contains("monomial") || !t.contains("coeffs")) bad("term needs 'monomial' and 'coeffs'");
        const json& mono = t.at("monomial");
        if (!mono.is_array() || static_cast<int>(mono.size()) != s.arity) bad("monomial must list every slot");
        // words need not be normal-ordered: each slot is straightened
        uea::TruncatedElement term = uea::TruncatedElement::one(s);
        for (int slot = 0; slot < s.arity; ++slot) {
            for (const json& g : mono[static_cast<std::size_t>(slot)]) {
                if (!g.is_array() || g.size() != 2 || !g[0].is_number_integer() || !g[1].is_number_integer())
                    bad("generators are written as [i, j]");
                const int i = g[0].get<int>();
                const int k = g[1].get<int>();
                if (i < 1 || i > s.n || k < 1 || k > s.n) bad("generator index out of range");
                term = term * uea::TruncatedElement::generator(s, slot, i, k);
            }
        }
        const json& coeffs = t.at("coeffs");
        if (!coeffs.is_array() || static_cast<int>(coeffs.size()) > s.hbar_order + 1) bad("too many hbar coefficients");
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            const cplx c = complex_from_json(coeffs[k]);
            if (c != cplx(0)) a += uea::hbar_shift(c * term, static_cast<int>(k));
        }
    }
    if (j.value("lossy", false)) a.mark_lossy();
    return a;
}

classical::IrregularSystem system_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("u") || !j.contains("V")) bad("system needs 'u' and 'V'");
    classical::IrregularSystem sys;
    sys.u = cvector_from_json(j.at("u"));
    sys.V = matrix_from_json(j.at("V"));
    if (j.contains("skew")) {
        if (!j.at("skew").is_boolean()) bad("'skew' must be a boolean");
        sys.skew = j.at("skew").get<bool>();
    }
    classical::validate(sys);
    return sys;
}

isomonodromy::CartanPath path_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("waypoints") || !j.at("waypoints").is_array()) bad("path needs 'waypoints'");
    isomonodromy::CartanPath p;
    for (const json& w : j.at("waypoints")) p.waypoints.push_back(rvector_from_json(w));
    isomonodromy::validate(p);
    return p;
}

json read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput("malformed JSON in " + path + ": " + e.what());
    }
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path);
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows, int digits)
{
    std::ostringstream os;
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
    os << "\n";
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            os << (k ? "," : "");
            if (std::isfinite(r[k])) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.*e", std::max(digits, 1) - 1, r[k]);
                os << buf;
            } else {
                os << "nan";
            }
        }
        os << "\n";
    }
    return os.str();
}

} // namespace isokz::io
