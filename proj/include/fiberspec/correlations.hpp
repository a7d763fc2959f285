#ifndef FIBERSPEC_CORRELATIONS_HPP
#define FIBERSPEC_CORRELATIONS_HPP

#include "fiberspec/base.hpp"
#include "fiberspec/skewprod.hpp"

#include <span>
#include <vector>

namespace fiberspec {

/// Backward fiber correlations ell^n C_{phi,u}(omega, n), n = 1..n_max, at
/// the representation point nearest omega, computed as
/// int phi * L_eps^n (u - rho(.) int u dm) dm. The family overload builds the
/// operator on rho's representation (grid 256 / depth 6 for a Constant rho).
std::vector<double> backward_corr(const SkewOperator& op, const RandomObservable& rho,
                                  const FiberFunction& phi, const FiberFunction& u,
                                  const BasePoint& omega, int n_max);
std::vector<double> backward_corr(const RandomMapFamily& fam, const BaseSystem& base,
                                  const RandomObservable& rho, const FiberFunction& phi,
                                  const FiberFunction& u, const BasePoint& omega, int n_max);

/// Same sequences for several representation indices from one pass of
/// iterates. Result[j] belongs to indices[j].
std::vector<std::vector<double>> backward_corr_at(const SkewOperator& op,
                                                  const RandomObservable& rho,
                                                  const FiberFunction& phi,
                                                  const FiberFunction& u,
                                                  std::span<const int> indices, int n_max);

/// int Phi * L_eps^n (U - rho int U dm) dm dP for n = 1..n_max.
/// Requires kp_defect(U) < 1e-8.
std::vector<double> integrated_corr(const SkewOperator& op, const RandomObservable& rho,
                                    const RandomObservable& phi, const RandomObservable& u,
                                    int n_max);

/// Deterministic correlations int phi * L^n (u - rho0 int u dm) dm, n = 1..n_max.
std::vector<double> deterministic_corr(const OperatorMatrix& op, const FiberFunction& rho0,
                                       const FiberFunction& phi, const FiberFunction& u,
                                       int n_max);

struct DecayFit {
    /// exp(slope) of the least-squares line through log|seq(n)|; 0 when
    /// fewer than 3 terms exceed the floor.
    double tau = 0.0;
    /// exp(intercept).
    double C = 0.0;
    /// Smallest C' with |seq(n)| <= C' tau^n for every n above the floor.
    double envelope_C = 0.0;
    /// max |seq(n+1) / seq(n)| over consecutive terms above the floor.
    double max_ratio = 0.0;
    /// |max_ratio - tau| > 0.1
    bool flagged = false;
};

/// Fit of seq(n) ~ C tau^n with n starting at 1. Requires seq.size() >= 4.
DecayFit fit_decay_rate(std::span<const double> seq, double floor = 1e-12);

} // namespace fiberspec

#endif
