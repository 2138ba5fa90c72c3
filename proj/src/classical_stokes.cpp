#include "isokz/classical_stokes.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace isokz::classical {

void validate(const IrregularSystem& sys, double skew_tol)
{
    const auto n = sys.u.size();
    if (n < 1) throw InvalidInput("system: u must be non-empty");
    if (sys.V.rows() != n || sys.V.cols() != n) throw InvalidInput("system: V must be n x n with n = len(u)");
    if (!sys.u.allFinite() || !sys.V.allFinite()) throw InvalidInput("system: non-finite entries");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(sys.u[i] - sys.u[j]) < 1e-8) throw InvalidInput("system: u is not regular (u_i == u_j)");
        }
    }
    if (sys.skew && (sys.V + sys.V.transpose()).cwiseAbs().maxCoeff() > skew_tol) {
        throw InvalidInput("system: skew flag set but V + V^T != 0");
    }
}

bool real_regular(const IrregularSystem& sys)
{
    for (Eigen::Index i = 0; i < sys.u.size(); ++i) {
        if (sys.u[i].imag() != 0.0) return false;
        for (Eigen::Index j = i + 1; j < sys.u.size(); ++j) {
            if (sys.u[i] == sys.u[j]) return false;
        }
    }
    return true;
}

bool real_ordered(const IrregularSystem& sys)
{
    if (!real_regular(sys)) return false;
    for (Eigen::Index i = 0; i + 1 < sys.u.size(); ++i) {
        if (!(sys.u[i].real() > sys.u[i + 1].real())) return false;
    }
    return true;
}

MatrixC diagonal_part(const MatrixC& v)
{
    return v.diagonal().asDiagonal();
}

sectorial::Problem h_problem(const IrregularSystem& sys)
{
    const Eigen::Index n = sys.u.size();
    const Eigen::Index dim = n * n;
    sectorial::Problem p;
    p.lambda.resize(dim);
    p.unit = VectorC::Zero(dim);
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index row = i + n * j;
            p.lambda[row] = sys.u[i] - sys.u[j];
            for (Eigen::Index k = 0; k < n; ++k) {
                if (sys.V(i, k) != cplx{}) trip.emplace_back(row, k + n * j, sys.V(i, k));
            }
            if (sys.V(j, j) != cplx{}) trip.emplace_back(row, row, -sys.V(j, j));
        }
        p.unit[j + n * j] = 1.0;
    }
    p.residue.resize(dim, dim);
    p.residue.setFromTriplets(trip.begin(), trip.end());
    return p;
}

namespace {

MatrixC unvec(const VectorC& y, Eigen::Index n)
{
    return Eigen::Map<const MatrixC>(y.data(), n, n);
}

VectorC vec(const MatrixC& m)
{
    return Eigen::Map<const VectorC>(m.data(), m.size());
}

double relative_error(const MatrixC& a, const MatrixC& b)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

} // namespace

std::vector<MatrixC> asymptotic_coefficients(const IrregularSystem& sys, int order)
{
    validate(sys);
    sectorial::Options o;
    o.order = order;
    o.max_radius = 1e300;
    const sectorial::Solver s(h_problem(sys), o);
    std::vector<MatrixC> out;
    for (std::size_t k = 1; k < s.coefficients().size(); ++k) out.push_back(unvec(s.coefficients()[k], sys.u.size()));
    return out;
}

sectorial::Options sectorial_options(const Options& opt)
{
    sectorial::Options s;
    s.order = opt.order;
    s.tol = opt.tol;
    s.min_radius = opt.min_anchor;
    return s;
}

namespace {

IrregularSystem checked(const IrregularSystem& sys)
{
    validate(sys);
    if (!real_regular(sys)) throw InvalidInput("half-plane sectors require real regular u");
    return sys;
}

} // namespace

SectorSolutions::SectorSolutions(const IrregularSystem& sys, const Options& opt)
    : sys_(checked(sys)), solver_(h_problem(sys_), sectorial_options(opt))
{
}

MatrixC SectorSolutions::H(int sector, double r, double arg) const
{
    return unvec(solver_.evaluate(sector, r, arg), sys_.u.size());
}

MatrixC SectorSolutions::H_with_anchor(double anchor_radius, int sector, double r, double arg) const
{
    return unvec(solver_.evaluate_with_anchor(anchor_radius, sector, r, arg), sys_.u.size());
}

MatrixC SectorSolutions::normal_form(double r, double arg) const
{
    const cplx z = std::polar(r, arg);
    const cplx logz(std::log(r), arg);
    const Eigen::Index n = sys_.u.size();
    VectorC d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = std::exp(sys_.V(i, i) * logz + z * sys_.u[i]);
    return d.asDiagonal();
}

MatrixC SectorSolutions::F(int sector, double r, double arg) const
{
    return H(sector, r, arg) * normal_form(r, arg);
}

namespace {

double condition_number(const MatrixC& m)
{
    Eigen::JacobiSVD<MatrixC> svd(m);
    const auto& s = svd.singularValues();
    return s[s.size() - 1] > 0 ? s[0] / s[s.size() - 1] : std::numeric_limits<double>::infinity();
}

// e^{-zU} z^{-[V]} M z^{[V]} e^{zU}, entrywise.
MatrixC strip_normal_form(const IrregularSystem& sys, const MatrixC& m, double r, double arg)
{
    const cplx z = std::polar(r, arg);
    const cplx logz(std::log(r), arg);
    MatrixC out = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out(i, j) *= std::exp(-z * (sys.u[i] - sys.u[j]) - logz * (sys.V(i, i) - sys.V(j, j)));
        }
    }
    return out;
}

} // namespace

StokesPair stokes_matrices(const IrregularSystem& sys, const Options& opt)
{
    return stokes_matrices(SectorSolutions(sys, opt), opt);
}

StokesPair stokes_matrices(const SectorSolutions& sol, const Options& opt)
{
    if (opt.radii.empty()) throw InvalidInput("stokes: at least one evaluation radius is required");
    StokesPair out;
    bool first = true;
    for (double r : opt.radii) {
        const MatrixC hp_neg = sol.H(1, r, kPi);
        const MatrixC hm_neg = sol.H(-1, r, -kPi);
        const MatrixC hp_pos = sol.H(1, r, 0.0);
        const MatrixC hm_pos = sol.H(-1, r, 0.0);
        const MatrixC sp = strip_normal_form(sol.system(), hp_neg.partialPivLu().solve(hm_neg), r, kPi);
        const MatrixC sm = strip_normal_form(sol.system(), hm_pos.partialPivLu().solve(hp_pos), r, 0.0);
        out.condition = std::max({out.condition, condition_number(hp_neg), condition_number(hm_pos)});
        if (first) {
            out.S_plus = sp;
            out.S_minus = sm;
            first = false;
        } else {
            out.radius_spread = std::max({out.radius_spread, (sp - out.S_plus).cwiseAbs().maxCoeff(),
                                          (sm - out.S_minus).cwiseAbs().maxCoeff()});
        }
    }
    out.digits = std::max(0.0, -std::log10(out.condition * std::max(opt.tol, 1e-16)));
    return out;
}

double triangularity_residual(const StokesPair& s)
{
    double r = 0.0;
    const auto n = s.S_plus.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        r = std::max({r, std::abs(s.S_plus(i, i) - 1.0), std::abs(s.S_minus(i, i) - 1.0)});
        for (Eigen::Index j = 0; j < i; ++j) r = std::max({r, std::abs(s.S_plus(i, j)), std::abs(s.S_minus(j, i))});
    }
    return r;
}

namespace {

ode::ZRhs f_rhs(const IrregularSystem& sys)
{
    const Eigen::Index n = sys.u.size();
    return [&sys, n](cplx z, const VectorC& y, VectorC& dy) {
        const MatrixC f = unvec(y, n);
        MatrixC d = sys.u.asDiagonal() * f;
        d.noalias() += (sys.V * f) / z;
        dy = vec(d);
    };
}

ode::Options f_options(double tol)
{
    ode::Options o;
    o.rtol = tol;
    o.atol = tol * 1e-2;
    return o;
}

} // namespace

MatrixC integrate_segment(const IrregularSystem& sys, cplx from, cplx to, const MatrixC& f0, double tol)
{
    return unvec(ode::along(f_rhs(sys), ode::Segment{from, to}, vec(f0), f_options(tol)), sys.u.size());
}

MatrixC integrate_arc(const IrregularSystem& sys, double r, double arg_from, double arg_to, const MatrixC& f0,
                      double tol)
{
    return unvec(ode::along(f_rhs(sys), ode::Arc{r, arg_from, arg_to}, vec(f0), f_options(tol)), sys.u.size());
}

MonodromyReport monodromy_consistency(const SectorSolutions& sol, const StokesPair& s, double tol)
{
    const IrregularSystem& sys = sol.system();
    const Eigen::Index n = sys.u.size();
    MonodromyReport rep;

    VectorC twist(n);
    for (Eigen::Index i = 0; i < n; ++i) twist[i] = std::exp(-2.0 * kPi * kI * sys.V(i, i));
    const MatrixC factor = s.S_plus * twist.asDiagonal() * s.S_minus;

    std::vector<MatrixC> transported;
    for (double rho : {1.0, 3.0}) {
        const MatrixC f0 = sol.F(1, rho, kPi / 2);
        const MatrixC looped = integrate_arc(sys, rho, kPi / 2, kPi / 2 - 2 * kPi, f0, tol);
        const MatrixC expected = f0 * factor;
        rep.residual = std::max(rep.residual, relative_error(looped, expected));

        const cplx det_ratio = looped.determinant() / f0.determinant();
        const cplx predicted = std::exp(-2.0 * kPi * kI * sys.V.trace());
        rep.liouville = std::max(rep.liouville, std::abs(det_ratio - predicted));

        // Transport both loops to z = 2i along the imaginary axis and compare.
        transported.push_back(integrate_segment(sys, cplx(0, rho), cplx(0, 2.0), looped, tol));
    }
    rep.path_disagreement = relative_error(transported[0], transported[1]);
    return rep;
}

std::vector<cplx> default_skew_samples()
{
    std::vector<cplx> z;
    for (double r : {1.5, 3.0}) {
        for (double a : {kPi / 4, kPi / 2, 3 * kPi / 4}) z.push_back(std::polar(r, a));
    }
    z.push_back(std::polar(2.0, -kPi / 3));
    z.push_back(std::polar(2.0, -2 * kPi / 3));
    return z;
}

std::vector<double> skew_symmetry_identity(const SectorSolutions& sol, const std::vector<cplx>& samples,
                                           bool require_skew_flag)
{
    if (require_skew_flag && !sol.system().skew) throw InvalidInput("skew identity requires a skew system");
    const auto n = sol.system().u.size();
    std::vector<double> out;
    for (cplx z : samples) {
        const double r = std::abs(z);
        const double a = std::arg(z);
        if (z.imag() == 0.0) throw InvalidInput("skew identity samples must lie off the real axis");
        const int sector = z.imag() > 0 ? 1 : -1;
        const double opposite = sector == 1 ? a - kPi : a + kPi;
        const MatrixC h = sol.H(sector, r, a);
        const MatrixC hm = sol.H(-sector, r, opposite);
        out.push_back((hm.transpose() * h - MatrixC::Identity(n, n)).cwiseAbs().maxCoeff());
    }
    return out;
}

} // namespace isokz::classical
