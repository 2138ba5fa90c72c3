#include "isokz/sectorial.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

namespace isokz::sectorial {

double zero_weight_threshold(const VectorC& lambda)
{
    const double scale = lambda.size() ? std::max(1.0, lambda.cwiseAbs().maxCoeff()) : 1.0;
    return 1e-9 * scale;
}

Solver::Solver(Problem problem, Options options) : problem_(std::move(problem)), options_(options)
{
    const Eigen::Index dim = problem_.unit.size();
    if (problem_.lambda.size() != dim || problem_.residue.rows() != dim || problem_.residue.cols() != dim) {
        throw InvalidInput("sectorial problem: inconsistent dimensions");
    }
    if (options_.order < 1) throw InvalidInput("asymptotic order must be >= 1");
    if (!(options_.tol > 0)) throw InvalidInput("tolerance must be positive");

    const double thr = zero_weight_threshold(problem_.lambda);
    zero_weight_.resize(static_cast<std::size_t>(dim));
    std::vector<Eigen::Index> zero_idx;
    std::vector<Eigen::Index> pos(static_cast<std::size_t>(dim), -1);
    for (Eigen::Index i = 0; i < dim; ++i) {
        zero_weight_[static_cast<std::size_t>(i)] = std::abs(problem_.lambda[i]) < thr;
        if (zero_weight_[static_cast<std::size_t>(i)]) {
            pos[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(zero_idx.size());
            zero_idx.push_back(i);
        } else if (problem_.unit[i] != cplx{}) {
            throw InvalidInput("sectorial problem: unit must have weight zero");
        }
    }

    // Weight-zero block of B, used to fix the weight-zero components.
    const auto nz = static_cast<Eigen::Index>(zero_idx.size());
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index col = 0; col < problem_.residue.outerSize(); ++col) {
        for (SparseC::InnerIterator it(problem_.residue, col); it; ++it) {
            const auto r = pos[static_cast<std::size_t>(it.row())];
            const auto c = pos[static_cast<std::size_t>(it.col())];
            if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
        }
    }
    SparseC b00(nz, nz);
    b00.setFromTriplets(trip.begin(), trip.end());

    const VectorC b_unit = problem_.residue * problem_.unit;
    double solvability = 0.0;
    for (Eigen::Index k = 0; k < nz; ++k) solvability = std::max(solvability, std::abs(b_unit[zero_idx[static_cast<std::size_t>(k)]]));
    if (solvability > 1e-10 * std::max(1.0, b_unit.cwiseAbs().maxCoeff())) {
        throw InvalidInput("sectorial problem: formal solution does not exist (weight-zero part of B unit is nonzero)");
    }

    coeffs_.push_back(problem_.unit);
    SparseC ident(nz, nz);
    ident.setIdentity();
    for (int p = 0; p < options_.order; ++p) {
        const VectorC& y = coeffs_.back();
        const VectorC rhs = -static_cast<double>(p) * y - problem_.residue * y;
        VectorC next = VectorC::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (!zero_weight_[static_cast<std::size_t>(i)]) next[i] = rhs[i] / problem_.lambda[i];
        }
        if (nz > 0) {
            // ((p+1) + B00) y0 = -(B y_nonzero)_0
            const VectorC bn = problem_.residue * next;
            VectorC r0(nz);
            for (Eigen::Index k = 0; k < nz; ++k) r0[k] = -bn[zero_idx[static_cast<std::size_t>(k)]];
            SparseC m = static_cast<double>(p + 1) * ident + b00;
            m.makeCompressed();
            Eigen::SparseLU<SparseC> lu;
            lu.compute(m);
            if (lu.info() != Eigen::Success) throw NumericalFailure("sectorial: resonant weight-zero block");
            const VectorC y0 = lu.solve(r0);
            for (Eigen::Index k = 0; k < nz; ++k) next[zero_idx[static_cast<std::size_t>(k)]] = y0[k];
        }
        coeffs_.push_back(std::move(next));
    }

    const double last = coeffs_.back().cwiseAbs().maxCoeff();
    const double target = options_.tol * 1e-3;
    double radius = options_.min_radius;
    while (last * std::pow(radius, -options_.order) >= target) {
        radius *= 1.05;
        if (radius > options_.max_radius) {
            std::ostringstream os;
            os << "sectorial: anchor radius exceeds " << options_.max_radius
               << " (asymptotic tail too large; lower the tolerance or raise the order)";
            throw NumericalFailure(os.str());
        }
    }
    anchor_.radius = radius;
    anchor_.tail = last * std::pow(radius, -options_.order);
}

VectorC Solver::series(cplx z, int terms) const
{
    const int K = terms < 0 ? static_cast<int>(coeffs_.size()) - 1 : std::min(terms, static_cast<int>(coeffs_.size()) - 1);
    VectorC y = coeffs_[static_cast<std::size_t>(K)];
    const cplx w = 1.0 / z;
    for (int p = K - 1; p >= 0; --p) y = coeffs_[static_cast<std::size_t>(p)] + w * y;
    return y;
}

double Solver::series_residual(cplx z, int terms) const
{
    const int K = std::min(terms, static_cast<int>(coeffs_.size()) - 1);
    VectorC y = VectorC::Zero(problem_.unit.size());
    VectorC dy = VectorC::Zero(problem_.unit.size());
    for (int p = 0; p <= K; ++p) {
        const cplx zp = std::pow(z, -p);
        y += zp * coeffs_[static_cast<std::size_t>(p)];
        dy += (-static_cast<double>(p) * zp / z) * coeffs_[static_cast<std::size_t>(p)];
    }
    const VectorC res = dy - problem_.lambda.cwiseProduct(y) - (problem_.residue * y) / z;
    return res.cwiseAbs().maxCoeff();
}

ode::ZRhs Solver::rhs() const
{
    return [this](cplx z, const VectorC& y, VectorC& dy) {
        dy = problem_.lambda.cwiseProduct(y);
        dy.noalias() += (problem_.residue * y) / z;
    };
}

ode::Options Solver::ode_options() const
{
    ode::Options o;
    o.rtol = options_.tol;
    o.atol = options_.tol * 1e-2;
    return o;
}

VectorC Solver::evaluate(int sector, double r, double arg) const
{
    return evaluate_with_anchor(anchor_.radius, sector, r, arg);
}

VectorC Solver::evaluate_with_anchor(double anchor_radius, int sector, double r, double arg) const
{
    if (sector != 1 && sector != -1) throw InvalidInput("sector must be +1 or -1");
    if (!(r > 0)) throw InvalidInput("evaluation radius must be positive");
    const double theta = sector * kPi / 2;
    if (std::abs(arg - theta) >= kPi) {
        throw InvalidInput("target argument lies outside the supersector of the chosen sector");
    }
    const cplx za = std::polar(anchor_radius, theta);
    VectorC y = series(za);
    const auto f = rhs();
    const auto opt = ode_options();
    y = ode::along(f, ode::Segment{za, std::polar(r, theta)}, std::move(y), opt);
    if (arg != theta) y = ode::along(f, ode::Arc{r, theta, arg}, std::move(y), opt);
    return y;
}

} // namespace isokz::sectorial
