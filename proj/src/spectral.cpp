#include "fiberspec/spectral.hpp"

#include "fiberspec/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace fiberspec {

namespace {

constexpr int kMaxDenseDimension = 1024;
constexpr int kGelfandSquarings = 5;
constexpr std::int64_t kMaxDeflatedSteps = 1'000'000;

template <class Matrix>
double gelfand_bound(Matrix b)
{
    double best = std::numeric_limits<double>::infinity();
    double power = 1.0;
    for (int q = 0; q <= kGelfandSquarings; ++q) {
        const double norm = b.norm();
        if (norm == 0.0)
            return 0.0;
        best = std::min(best, std::pow(norm, 1.0 / power));
        if (q < kGelfandSquarings) {
            b = (b * b).eval();
            power *= 2.0;
        }
    }
    return best;
}

LeadingPair leading_pair_fourier(const OperatorMatrix& op, double tol, int max_iter)
{
    const int n = op.truncation();
    FiberFunction c = FiberFunction::constant(n, 1.0);
    double diff = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        FiberFunction next = op.apply(c);
        const cplx lambda = next.coeff(0) / c.coeff(0);
        next *= 1.0 / next.coeff(0);
        diff = (next - c).c1_norm();
        c = std::move(next);
        if (diff < tol)
            return {lambda, c, it, diff};
    }
    throw NumericalError("leading_pair: power iteration did not converge", diff);
}

LeadingPair leading_pair_ulam(const OperatorMatrix& op, double tol, int max_iter)
{
    std::vector<double> v(op.n(), 1.0);
    double diff = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<double> next = op.apply(v);
        const double mass_before = std::accumulate(v.begin(), v.end(), 0.0);
        const double mass = std::accumulate(next.begin(), next.end(), 0.0);
        const double scale = static_cast<double>(next.size()) / mass;
        diff = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] *= scale;
            diff = std::max(diff, std::abs(next[i] - v[i]));
        }
        v = std::move(next);
        if (diff < tol)
            return {mass / mass_before, CellDensity{v}, it, diff};
    }
    throw NumericalError("leading_pair: power iteration did not converge", diff);
}

} // namespace

double CellDensity::operator()(double x) const
{
    const int n = static_cast<int>(values.size());
    double t = x - std::floor(x);
    int i = static_cast<int>(t * n);
    return values[std::min(i, n - 1)];
}

double CellDensity::integral() const
{
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double evaluate(const Density& density, double x)
{
    if (const auto* f = std::get_if<FiberFunction>(&density))
        return (*f)(x).real();
    return std::get<CellDensity>(density)(x);
}

LeadingPair leading_pair(const OperatorMatrix& op, double tol, int max_iter)
{
    if (!(tol > 0.0))
        throw ConfigError("leading_pair: tol must be positive");
    if (op.basis() == Basis::FourierCollocation)
        return leading_pair_fourier(op, tol, max_iter);
    return leading_pair_ulam(op, tol, max_iter);
}

FiberFunction cesaro_projection(const OperatorMatrix& op, const FiberFunction& u, std::int64_t n)
{
    if (n < 1)
        throw ConfigError("cesaro_projection: n must be >= 1");
    const int dim = op.n();
    if (n <= 8LL * dim) {
        FiberFunction iterate = u;
        FiberFunction sum(u.truncation());
        for (std::int64_t k = 1; k <= n; ++k) {
            iterate = op.apply(iterate);
            sum += iterate;
        }
        sum *= 1.0 / static_cast<double>(n);
        return sum;
    }
    // Large n: with A = rho e0^T + B (mass deflation) A^k = rho e0^T + B^k, so
    // the mean is rho * int u + (1/n) sum_{k=1..n} B^k u. B contracts, so the
    // sum is complete once its terms underflow to zero.
    if (u.truncation() != op.truncation())
        throw ConfigError("cesaro_projection: truncation mismatch");
    const FiberFunction rho = std::get<FiberFunction>(leading_pair(op).density);
    FiberFunction term = u;
    FiberFunction tail(u.truncation());
    for (std::int64_t k = 1; k <= n; ++k) {
        const cplx mass = term.coeff(0);
        term = op.apply(term);
        term -= rho * mass;
        tail += term;
        if (std::all_of(term.coeffs().begin(), term.coeffs().end(), [](cplx z) { return z == 0.0; }))
            break;
        if (k == kMaxDeflatedSteps)
            throw NumericalError("cesaro_projection: deflated series did not vanish",
                                 term.c1_norm());
    }
    tail *= 1.0 / static_cast<double>(n);
    return rho * u.integral() + tail;
}

double subdominant_radius(const OperatorMatrix& op)
{
    if (op.n() > kMaxDenseDimension)
        throw ConfigError("subdominant_radius: dimension exceeds 1024");
    const Eigen::MatrixXcd a = op.dense_action();

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("subdominant_radius: eigenvalue computation failed");
    std::vector<cplx> ev(solver.eigenvalues().data(),
                         solver.eigenvalues().data() + solver.eigenvalues().size());
    if (ev.size() < 2)
        return 0.0;
    // the eigenvalue closest to 1 is removed; ties go to the larger modulus
    auto closest = std::min_element(ev.begin(), ev.end(), [](const cplx& x, const cplx& y) {
        const double dx = std::abs(x - 1.0), dy = std::abs(y - 1.0);
        if (dx != dy)
            return dx < dy;
        return std::abs(x) > std::abs(y);
    });
    ev.erase(closest);
    double eig_radius = 0.0;
    for (const auto& z : ev)
        eig_radius = std::max(eig_radius, std::abs(z));

    // Mass-deflated operator B = A - rho * mass^T with mass(rho) = 1.
    const LeadingPair lead = leading_pair(op);
    double bound;
    if (op.basis() == Basis::FourierCollocation) {
        const auto& rho = std::get<FiberFunction>(lead.density);
        Eigen::MatrixXcd b = a;
        const int center = op.truncation();
        for (int i = 0; i < op.n(); ++i)
            b(i, center) -= rho.coeffs()[i];
        bound = gelfand_bound(std::move(b));
    } else {
        const auto& rho = std::get<CellDensity>(lead.density).values;
        Eigen::MatrixXd b = op.dense_action().real();
        const double w = 1.0 / op.n();
        for (int i = 0; i < op.n(); ++i)
            for (int j = 0; j < op.n(); ++j)
                b(i, j) -= rho[i] * w;
        bound = gelfand_bound(std::move(b));
    }
    return std::min(eig_radius, bound);
}

double decay_rate_upper(const CircleMap& map, const OperatorMatrix& op, double r, int m_max)
{
    return std::max(subdominant_radius(op), expanding_constant(map, r, m_max).value);
}

} // namespace fiberspec
