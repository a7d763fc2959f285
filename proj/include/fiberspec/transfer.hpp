#ifndef FIBERSPEC_TRANSFER_HPP
#define FIBERSPEC_TRANSFER_HPP

#include "fiberspec/fiber_function.hpp"
#include "fiberspec/maps.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <span>
#include <vector>

namespace fiberspec {

enum class Basis { FourierCollocation, Ulam };

/// A discretized transfer operator L(f).
///
/// FourierCollocation: dense (2N+1)x(2N+1) complex matrix acting on the
/// coefficient vector c_{-N..N}; column k holds the coefficients of L e_k.
///
/// Ulam: sparse row-stochastic N x N matrix P_ij = m(I_i n f^{-1} I_j) / m(I_i)
/// over the uniform partition. Densities (cell values) evolve as v <- P^T v.
class OperatorMatrix {
public:
    using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    static OperatorMatrix fourier(int truncation, Eigen::MatrixXcd matrix);
    static OperatorMatrix ulam(SparseRows matrix);

    Basis basis() const noexcept { return basis_; }
    /// Matrix dimension: 2N+1 for Fourier, number of cells for Ulam.
    int n() const noexcept { return n_; }
    /// Fourier truncation N (Fourier basis only).
    int truncation() const;

    const Eigen::MatrixXcd& fourier_matrix() const;
    const SparseRows& ulam_matrix() const;

    /// The operator as it acts on column vectors (A for Fourier, P^T for Ulam).
    Eigen::MatrixXcd dense_action() const;

    FiberFunction apply(const FiberFunction& u) const;
    std::vector<double> apply(std::span<const double> density) const;

private:
    Basis basis_ = Basis::FourierCollocation;
    int n_ = 0;
    Eigen::MatrixXcd fourier_;
    SparseRows ulam_;
};

/// (L(f) u)(x) = sum_{f(y) = x} u(y) / |f'(y)| by explicit branch enumeration.
cplx transfer_apply_exact(const CircleMap& map, const FiberFunction& u, double x);
cplx transfer_apply_exact(const ComposedMap& map, const FiberFunction& u, double x);

/// Fourier-collocation matrix with N modes on a 4N-point collocation grid.
OperatorMatrix assemble_fourier(const CircleMap& map, int truncation);
OperatorMatrix assemble_fourier(const ComposedMap& map, int truncation);

/// Ulam matrix over N uniform cells, from exact interval preimages.
OperatorMatrix assemble_ulam(const CircleMap& map, int cells);

/// |int phi L(u) dm - int (phi o f) u dm| by 4096-point trapezoid quadrature.
double duality_residual(const CircleMap& map, const FiberFunction& phi, const FiberFunction& u);

/// max over `trials` random trigonometric polynomials u of
/// c1_norm(L u) / c1_norm(u): an empirical weak Lasota-Yorke constant.
double c1_norm_bound_estimate(const CircleMap& map, int trials, std::uint64_t seed = 0x5eed);

} // namespace fiberspec

#endif
