#include "fiberspec/transfer.hpp"

#include "fiberspec/errors.hpp"
#include "fiberspec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace fiberspec {

namespace {

constexpr int kQuadraturePoints = 4096;
// Entries below this are roundoff from the collocation transform; keeping
// them would turn exact nilpotent blocks into spurious O(eps^(1/s)) spectra.
constexpr double kChop = 1e-14;

using PreimageFn = std::function<std::vector<Preimage>(double)>;

cplx branch_sum(const std::vector<Preimage>& pre, const FiberFunction& u)
{
    cplx s = 0.0;
    for (const auto& p : pre)
        s += u(p.y) / std::abs(p.derivative);
    return s;
}

OperatorMatrix assemble_fourier_impl(const PreimageFn& preimages, int truncation)
{
    if (truncation < 1)
        throw ConfigError("assemble_fourier: truncation must be >= 1");
    const int n = 2 * truncation + 1;
    const int m = 4 * truncation;
    // values[k + N][j] = (L e_k)(j / m)
    std::vector<std::vector<cplx>> values(n, std::vector<cplx>(m, 0.0));
    for (int j = 0; j < m; ++j) {
        const auto pre = preimages(static_cast<double>(j) / m);
        for (const auto& p : pre) {
            const double w = 1.0 / std::abs(p.derivative);
            for (int k = -truncation; k <= truncation; ++k)
                values[k + truncation][j] += w * unit_phase(k, p.y);
        }
    }
    Eigen::MatrixXcd a(n, n);
    for (int col = 0; col < n; ++col) {
        const FiberFunction lek = FiberFunction::from_samples(truncation, values[col]);
        for (int row = 0; row < n; ++row) {
            cplx v = lek.coeffs()[row];
            if (std::abs(v.real()) < kChop)
                v.real(0.0);
            if (std::abs(v.imag()) < kChop)
                v.imag(0.0);
            a(row, col) = v;
        }
    }
    return OperatorMatrix::fourier(truncation, std::move(a));
}

} // namespace

OperatorMatrix OperatorMatrix::fourier(int truncation, Eigen::MatrixXcd matrix)
{
    const int n = 2 * truncation + 1;
    if (matrix.rows() != n || matrix.cols() != n)
        throw ConfigError("OperatorMatrix::fourier: matrix must be (2N+1)x(2N+1)");
    OperatorMatrix op;
    op.basis_ = Basis::FourierCollocation;
    op.n_ = n;
    op.fourier_ = std::move(matrix);
    return op;
}

OperatorMatrix OperatorMatrix::ulam(SparseRows matrix)
{
    if (matrix.rows() != matrix.cols())
        throw ConfigError("OperatorMatrix::ulam: matrix must be square");
    OperatorMatrix op;
    op.basis_ = Basis::Ulam;
    op.n_ = static_cast<int>(matrix.rows());
    op.ulam_ = std::move(matrix);
    return op;
}

int OperatorMatrix::truncation() const
{
    if (basis_ != Basis::FourierCollocation)
        throw ConfigError("OperatorMatrix: truncation is defined for the Fourier basis only");
    return (n_ - 1) / 2;
}

const Eigen::MatrixXcd& OperatorMatrix::fourier_matrix() const
{
    if (basis_ != Basis::FourierCollocation)
        throw ConfigError("OperatorMatrix: not a Fourier matrix");
    return fourier_;
}

const OperatorMatrix::SparseRows& OperatorMatrix::ulam_matrix() const
{
    if (basis_ != Basis::Ulam)
        throw ConfigError("OperatorMatrix: not an Ulam matrix");
    return ulam_;
}

Eigen::MatrixXcd OperatorMatrix::dense_action() const
{
    if (basis_ == Basis::FourierCollocation)
        return fourier_;
    return Eigen::MatrixXd(ulam_.transpose()).cast<cplx>();
}

FiberFunction OperatorMatrix::apply(const FiberFunction& u) const
{
    const int nn = truncation();
    if (u.truncation() != nn)
        throw ConfigError("OperatorMatrix::apply: truncation mismatch");
    FiberFunction out(nn);
    Eigen::Map<const Eigen::VectorXcd> in(u.coeffs().data(), n_);
    Eigen::Map<Eigen::VectorXcd>(out.coeffs().data(), n_).noalias() = fourier_ * in;
    return out;
}

std::vector<double> OperatorMatrix::apply(std::span<const double> density) const
{
    if (basis_ != Basis::Ulam)
        throw ConfigError("OperatorMatrix::apply: cell densities need the Ulam basis");
    if (static_cast<int>(density.size()) != n_)
        throw ConfigError("OperatorMatrix::apply: size mismatch");
    std::vector<double> out(n_, 0.0);
    Eigen::Map<const Eigen::VectorXd> in(density.data(), n_);
    Eigen::Map<Eigen::VectorXd>(out.data(), n_).noalias() = ulam_.transpose() * in;
    return out;
}

cplx transfer_apply_exact(const CircleMap& map, const FiberFunction& u, double x)
{
    return branch_sum(map.preimages(x), u);
}

cplx transfer_apply_exact(const ComposedMap& map, const FiberFunction& u, double x)
{
    return branch_sum(map.preimages(x), u);
}

OperatorMatrix assemble_fourier(const CircleMap& map, int truncation)
{
    return assemble_fourier_impl([&map](double x) { return map.preimages(x); }, truncation);
}

OperatorMatrix assemble_fourier(const ComposedMap& map, int truncation)
{
    return assemble_fourier_impl([&map](double x) { return map.preimages(x); }, truncation);
}

OperatorMatrix assemble_ulam(const CircleMap& map, int cells)
{
    if (cells < 2)
        throw ConfigError("assemble_ulam: need at least two cells");
    const double h = 1.0 / cells;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(cells) * (map.degree() + 2));
    std::map<int, double> row;
    for (int i = 0; i < cells; ++i) {
        row.clear();
        const double a = i * h;
        const double b = (i + 1) * h;
        const double fa = map.lift(a);
        const double fb = map.lift(b);
        // F([a, b]) = [fa, fb]; split at the partition points m h inside it.
        long long m = static_cast<long long>(std::floor(fa * cells));
        const long long m_end = static_cast<long long>(std::ceil(fb * cells)) - 1;
        double y_prev = a;
        for (; m <= m_end; ++m) {
            const double cut = static_cast<double>(m + 1) / cells;
            const double y = (m + 1 > m_end) ? b : map.solve_lift(cut, a, b);
            const int col = static_cast<int>(((m % cells) + cells) % cells);
            row[col] += (y - y_prev) / h;
            y_prev = y;
        }
        for (auto [col, v] : row)
            if (v > 0.0)
                triplets.emplace_back(i, col, v);
    }
    OperatorMatrix::SparseRows p(cells, cells);
    p.setFromTriplets(triplets.begin(), triplets.end());
    return OperatorMatrix::ulam(std::move(p));
}

double duality_residual(const CircleMap& map, const FiberFunction& phi, const FiberFunction& u)
{
    const auto phi_vals = phi.samples(kQuadraturePoints);
    const auto u_vals = u.samples(kQuadraturePoints);
    cplx lhs = 0.0, rhs = 0.0;
    for (int j = 0; j < kQuadraturePoints; ++j) {
        const double x = static_cast<double>(j) / kQuadraturePoints;
        lhs += phi_vals[j] * transfer_apply_exact(map, u, x);
        rhs += phi(map(x)) * u_vals[j];
    }
    return std::abs(lhs - rhs) / kQuadraturePoints;
}

double c1_norm_bound_estimate(const CircleMap& map, int trials, std::uint64_t seed)
{
    if (trials < 10)
        throw ConfigError("c1_norm_bound_estimate: need at least 10 trials");
    constexpr int kTruncation = 64;
    constexpr int kBand = 16;
    const OperatorMatrix op = assemble_fourier(map, kTruncation);
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const int band = 1 + static_cast<int>(rng.below(kBand));
        std::vector<TrigTerm> terms;
        for (int k = 1; k <= band; ++k)
            terms.push_back({k, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        const FiberFunction u = FiberFunction::trig(kTruncation, rng.uniform(-1.0, 1.0), terms);
        worst = std::max(worst, op.apply(u).c1_norm() / u.c1_norm());
    }
    return worst;
}

} // namespace fiberspec
