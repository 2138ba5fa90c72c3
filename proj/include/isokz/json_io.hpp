#pragma once

// JSON/CSV serialization. Floating-point values are rounded to a fixed
// number of significant digits before they are written, so reports built
// from identical computations are byte-identical.

#include <string>
#include <vector>

#include <json.hpp>

#include "isokz/classical_isomonodromy.hpp"
#include "isokz/classical_stokes.hpp"
#include "isokz/common.hpp"
#include "isokz/uea.hpp"

namespace isokz::io {

using json = nlohmann::json;

constexpr int kDefaultDigits = 12;

// x rounded to `digits` significant digits; non-finite values map to null.
json number(double x, int digits = kDefaultDigits);
json to_json(cplx z, int digits = kDefaultDigits);
json to_json(const MatrixC& m, int digits = kDefaultDigits);
json to_json(const VectorC& v, int digits = kDefaultDigits);
json to_json(const VectorR& v, int digits = kDefaultDigits);
json to_json(const std::vector<double>& v, int digits = kDefaultDigits);
// {n, arity, hbar_order, degree_cap, lossy, terms: [{monomial, coeffs}]} with
// monomial = per slot a list of [i, j] generators, coeffs = [re, im] per hbar order.
json to_json(const uea::TruncatedElement& a, int digits = kDefaultDigits);

// Parsers throw InvalidInput with the offending field named.
cplx complex_from_json(const json& j);
MatrixC matrix_from_json(const json& j);
VectorC cvector_from_json(const json& j);
VectorR rvector_from_json(const json& j);
uea::TruncatedElement element_from_json(const json& j);
// {"u": [...], "V": [[...]...], "skew": bool}
classical::IrregularSystem system_from_json(const json& j);
// {"waypoints": [[...], ...]}
isomonodromy::CartanPath path_from_json(const json& j);

json read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
// Two-space indentation and a trailing newline.
std::string dump(const json& j);

// Rows of numbers with a header line; values at fixed precision.
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                int digits = kDefaultDigits);

} // namespace isokz::io
