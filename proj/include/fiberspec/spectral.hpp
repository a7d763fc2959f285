#ifndef FIBERSPEC_SPECTRAL_HPP
#define FIBERSPEC_SPECTRAL_HPP

#include "fiberspec/fiber_function.hpp"
#include "fiberspec/maps.hpp"
#include "fiberspec/transfer.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace fiberspec {

/// Piecewise-constant density over uniform cells (Ulam basis).
struct CellDensity {
    std::vector<double> values;

    double operator()(double x) const;
    double integral() const;
};

using Density = std::variant<FiberFunction, CellDensity>;

double evaluate(const Density& density, double x);

struct LeadingPair {
    cplx eigenvalue;
    /// Normalized so that its integral is 1.
    Density density;
    int iterations = 0;
    double residual = 0.0;
};

/// Power iteration from the constant function 1; stops when successive
/// normalized iterates differ by less than `tol` (C^1 norm for Fourier, sup
/// norm for Ulam cells). Throws NumericalError after `max_iter` steps.
LeadingPair leading_pair(const OperatorMatrix& op, double tol = 1e-12, int max_iter = 10000);

/// (1/n) sum_{k=1..n} L^k u (Fourier basis). For n > 8 * dim the powers are
/// split as L^k = rho0 * int + B^k with B the mass-deflated operator, so the
/// cost is bounded by the decay of B^k rather than by n.
FiberFunction cesaro_projection(const OperatorMatrix& op, const FiberFunction& u, std::int64_t n);

/// Largest |z| over the spectrum of the matrix after removing the eigenvalue
/// closest to 1. Requires n() <= 1024.
///
/// Eigenvalues come from a dense Schur decomposition. Because exact nilpotent
/// blocks (linear maps) make those eigenvalues ill-conditioned, the result is
/// capped by the Gelfand bound ||B^m||^{1/m} of the mass-deflated operator
/// B = A - rho * mass, which is exact when B is nilpotent.
double subdominant_radius(const OperatorMatrix& op);

/// max(subdominant_radius(op), expanding_constant(map, r, m_max)).
double decay_rate_upper(const CircleMap& map, const OperatorMatrix& op, double r, int m_max = 8);

} // namespace fiberspec

#endif
