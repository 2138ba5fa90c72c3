#include "isokz/classical_isomonodromy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "isokz/ode.hpp"

namespace isokz::isomonodromy {

double CartanPath::length() const
{
    double l = 0.0;
    for (std::size_t k = 1; k < waypoints.size(); ++k) l += (waypoints[k] - waypoints[k - 1]).norm();
    return l;
}

std::vector<double> CartanPath::breakpoints() const
{
    std::vector<double> b{0.0};
    for (std::size_t k = 1; k < waypoints.size(); ++k) b.push_back(b.back() + (waypoints[k] - waypoints[k - 1]).norm());
    return b;
}

VectorR CartanPath::at(double s) const
{
    if (waypoints.size() == 1 || s <= 0) return waypoints.front();
    const auto b = breakpoints();
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
        if (s <= b[k] || k + 1 == waypoints.size()) {
            const double seg = b[k] - b[k - 1];
            if (seg == 0.0) return waypoints[k];
            const double t = std::clamp((s - b[k - 1]) / seg, 0.0, 1.0);
            return (1 - t) * waypoints[k - 1] + t * waypoints[k];
        }
    }
    return waypoints.back();
}

void validate(const CartanPath& path, double guard)
{
    if (path.waypoints.empty()) throw InvalidInput("path: no waypoints");
    const auto n = path.waypoints.front().size();
    std::vector<int> order;
    for (const auto& w : path.waypoints) {
        if (w.size() != n) throw InvalidInput("path: waypoints have different dimensions");
        if (!w.allFinite()) throw InvalidInput("path: non-finite waypoint");
        std::vector<int> o;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double d = w[i] - w[j];
                if (std::abs(d) < guard) throw InvalidInput("path: waypoint on a wall u_i = u_j");
                o.push_back(d > 0 ? 1 : -1);
            }
        }
        if (order.empty()) {
            order = o;
        } else if (o != order) {
            throw InvalidInput("path: coordinate ordering changes (wall crossing)");
        }
    }
}

MatrixC ad_u_inverse(const VectorR& u, const MatrixC& v, double guard)
{
    const auto n = u.size();
    MatrixC w = MatrixC::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = u[i] - u[j];
            if (std::abs(d) < guard) {
                std::ostringstream os;
                os << "near-degenerate u: |u_" << i + 1 << " - u_" << j + 1 << "| = " << std::abs(d);
                throw NumericalFailure(os.str());
            }
            w(i, j) = v(i, j) / d;
        }
    }
    return w;
}

MatrixC lambda_coefficient(const VectorR& u, const MatrixC& v, int k)
{
    const MatrixC w = ad_u_inverse(u, v);
    MatrixC out = MatrixC::Zero(w.rows(), w.cols());
    // E_kk W keeps row k, W E_kk keeps column k.
    out.row(k) += w.row(k);
    out.col(k) -= w.col(k);
    return out;
}

std::vector<MatrixC> lambda_form(const VectorR& u, const MatrixC& v)
{
    std::vector<MatrixC> out;
    for (int k = 0; k < u.size(); ++k) out.push_back(lambda_coefficient(u, v, k));
    return out;
}

MatrixC iso_vector_field(const VectorR& u, const MatrixC& v, int k)
{
    const MatrixC vk = lambda_coefficient(u, v, k);
    return vk * v - v * vk;
}

namespace {

VectorC vec(const MatrixC& m)
{
    return Eigen::Map<const VectorC>(m.data(), m.size());
}

MatrixC unvec(const VectorC& y, Eigen::Index n)
{
    return Eigen::Map<const MatrixC>(y.data(), n, n);
}

// Flow along the straight segment a -> b, parameter t in [0, 1].
MatrixC flow_segment(const VectorR& a, const VectorR& b, const MatrixC& v, double guard_norm, const FlowOptions& opt)
{
    const auto n = a.size();
    const VectorR du = b - a;
    if (du.norm() == 0.0) return v;
    auto rhs = [&](double t, const VectorC& y, VectorC& dy) {
        const VectorR u = a + t * du;
        const MatrixC m = unvec(y, n);
        const double norm = m.norm();
        if (!(norm <= guard_norm)) {
            std::ostringstream os;
            os << "isomonodromy flow blow-up near u = (" << u.transpose() << "): |V| = " << norm;
            throw NumericalFailure(os.str());
        }
        const MatrixC w = ad_u_inverse(u, m);
        // sum_k du_k V_k = D W - W D with D = diag(du).
        MatrixC l = du.cast<cplx>().asDiagonal() * w;
        l -= w * du.cast<cplx>().asDiagonal();
        dy = vec(l * m - m * l);
    };
    ode::Options o;
    o.rtol = opt.tol;
    o.atol = opt.tol * 1e-2;
    return unvec(ode::integrate(rhs, 0.0, 1.0, vec(v), o), n);
}

} // namespace

std::vector<double> even_samples(const CartanPath& path, int count)
{
    if (count < 1) throw InvalidInput("sample count must be >= 1");
    std::vector<double> s;
    const double len = path.length();
    if (count == 1) return {len};
    for (int k = 0; k < count; ++k) s.push_back(len * k / (count - 1));
    return s;
}

std::vector<FlowSample> integrate_iso_flow(const CartanPath& path, const MatrixC& v0, const std::vector<double>& at,
                                           const FlowOptions& opt)
{
    validate(path);
    if (v0.rows() != path.dim() || v0.cols() != path.dim()) throw InvalidInput("flow: V0 must be n x n");
    const double guard_norm = opt.blowup_factor * std::max(v0.norm(), 1e-300);
    const auto b = path.breakpoints();

    // Stops are the requested samples merged with the path corners.
    std::vector<double> stops = b;
    stops.insert(stops.end(), at.begin(), at.end());
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    std::vector<FlowSample> out;
    MatrixC v = v0;
    double s_prev = 0.0;
    VectorR u_prev = path.at(0.0);
    std::size_t next = 0;
    auto record = [&](double s) {
        while (next < at.size() && at[next] <= s) {
            out.push_back({at[next], path.at(at[next]), v});
            ++next;
        }
    };
    record(0.0);
    for (double s : stops) {
        if (s <= s_prev) continue;
        const VectorR u = path.at(s);
        if (v0.norm() > 0) v = flow_segment(u_prev, u, v, guard_norm, opt);
        s_prev = s;
        u_prev = u;
        record(s);
    }
    record(std::numeric_limits<double>::infinity());
    return out;
}

Curvature curvature(const VectorR& u, const MatrixC& v, const MatrixC& dv_k, const MatrixC& l_k, int k)
{
    const auto n = u.size();
    const MatrixC U = u.cast<cplx>().asDiagonal();
    MatrixC ekk = MatrixC::Zero(n, n);
    ekk(k, k) = 1.0;
    return {U * l_k - l_k * U + v * ekk - ekk * v, dv_k + v * l_k - l_k * v};
}

std::vector<CurvatureRow> dubrovin_flat_sections(const CartanPath& path, const MatrixC& v0,
                                                 const std::vector<cplx>& z_grid, int samples,
                                                 const FlowOptions& opt, bool drop_lambda)
{
    const auto flow = integrate_iso_flow(path, v0, even_samples(path, samples), opt);
    const int n = path.dim();
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& w : path.waypoints) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) gap = std::min(gap, std::abs(w[i] - w[j]));
        }
    }
    const double h = std::min(1e-2, gap / 20);
    const double guard_norm = opt.blowup_factor * std::max(v0.norm(), 1e-300);

    std::vector<CurvatureRow> rows;
    for (const auto& smp : flow) {
        for (int k = 0; k < n; ++k) {
            VectorR e = VectorR::Zero(n);
            e[k] = 1.0;
            auto shifted = [&](double t) {
                return v0.norm() > 0 ? flow_segment(smp.u, smp.u + t * e, smp.V, guard_norm, opt) : smp.V;
            };
            const MatrixC dv = (-shifted(2 * h) + 8.0 * shifted(h) - 8.0 * shifted(-h) + shifted(-2 * h)) / (12 * h);
            const MatrixC lk = drop_lambda ? MatrixC::Zero(n, n) : lambda_coefficient(smp.u, smp.V, k);
            const Curvature c = curvature(smp.u, smp.V, dv, lk, k);
            for (cplx z : z_grid) {
                rows.push_back({smp.s, k, z, (c.c0 + c.c1 / z).cwiseAbs().maxCoeff()});
            }
        }
    }
    return rows;
}

double spectrum_distance(const MatrixC& a, const MatrixC& b)
{
    const VectorC ea = Eigen::ComplexEigenSolver<MatrixC>(a, false).eigenvalues();
    const VectorC eb = Eigen::ComplexEigenSolver<MatrixC>(b, false).eigenvalues();
    auto one_way = [](const VectorC& x, const VectorC& y) {
        double r = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) r = std::max(r, (y.array() - x[i]).abs().minCoeff());
        return r;
    };
    return std::max(one_way(ea, eb), one_way(eb, ea));
}

std::vector<DriftRow> stokes_drift(const CartanPath& path, const MatrixC& v0, int samples, const FlowOptions& flow,
                                   const classical::Options& stokes, const classical::StokesPair* reference)
{
    const auto states = integrate_iso_flow(path, v0, even_samples(path, samples), flow);
    std::vector<DriftRow> rows;
    classical::StokesPair ref;
    if (reference) ref = *reference;
    for (std::size_t k = 0; k < states.size(); ++k) {
        classical::IrregularSystem sys{states[k].u.cast<cplx>(), states[k].V, false};
        const auto st = classical::stokes_matrices(sys, stokes);
        if (k == 0 && !reference) ref = st;
        DriftRow r;
        r.s = states[k].s;
        r.drift_plus = (st.S_plus - ref.S_plus).cwiseAbs().maxCoeff();
        r.drift_minus = (st.S_minus - ref.S_minus).cwiseAbs().maxCoeff();
        r.skewness = (states[k].V + states[k].V.transpose()).cwiseAbs().maxCoeff();
        r.spectrum = spectrum_distance(states[k].V, v0);
        rows.push_back(r);
    }
    return rows;
}

} // namespace isokz::isomonodromy
