#ifndef FIBERSPEC_SKEWPROD_HPP
#define FIBERSPEC_SKEWPROD_HPP

#include "fiberspec/base.hpp"
#include "fiberspec/maps.hpp"
#include "fiberspec/transfer.hpp"

#include <variant>
#include <vector>

namespace fiberspec {

/// f_eps(omega) = f0 + eps * s(omega) as a constant lift offset.
struct AdditiveNoise {
    bool operator==(const AdditiveNoise&) const = default;
};

/// f_eps(omega): coefficient a_k (or b_k) of f0's lift perturbed by eps * s(omega).
struct ParametricNoise {
    int k = 1;
    enum class Coefficient { A, B } coefficient = Coefficient::A;

    bool operator==(const ParametricNoise&) const = default;
};

using NoiseKind = std::variant<AdditiveNoise, ParametricNoise>;

/// s: Omega -> [-1, 1]. Interval points use cos(2 pi omega); symbol words
/// use levels[omega_0].
struct NoiseProfile {
    std::vector<double> levels;

    /// Empty levels for interval bases, linspace(-1, 1, K) for the shift.
    static NoiseProfile default_for(const BaseSystem& base);

    double operator()(const BasePoint& omega) const;

    bool operator==(const NoiseProfile&) const = default;
};

/// The noise family omega -> f_eps(omega) around an unperturbed map f0.
class RandomMapFamily {
public:
    /// Throws ConfigError unless 0 <= eps < eps_max.
    RandomMapFamily(CircleMap f0, NoiseKind kind, NoiseProfile profile, double eps);

    /// Additive: infinity (F' is unchanged). Parametric: inf F0' - 1, since the
    /// perturbation moves F' by at most eps.
    static double eps_max(const CircleMap& f0, const NoiseKind& kind);
    /// Constant with sup_omega d_{C^2}(f_eps(omega), f0) <= lipschitz * eps.
    static double lipschitz(const NoiseKind& kind);

    const CircleMap& f0() const noexcept { return f0_; }
    const NoiseKind& kind() const noexcept { return kind_; }
    const NoiseProfile& profile() const noexcept { return profile_; }
    double epsilon() const noexcept { return eps_; }
    double eps_max() const { return eps_max(f0_, kind_); }
    double lipschitz() const { return lipschitz(kind_); }

    /// f_eps(omega). Returns f0 itself whenever eps * s(omega) == 0.
    CircleMap fiber_map(const BasePoint& omega) const;

    /// The family with a different eps (validated again).
    RandomMapFamily with_epsilon(double eps) const;

private:
    CircleMap f0_;
    NoiseKind kind_;
    NoiseProfile profile_;
    double eps_;
};

/// f^(n)(omega) = f(theta^{n-1} omega) o ... o f(omega).
ComposedMap fiber_compose_n(const RandomMapFamily& fam, const BaseSystem& base,
                            const BasePoint& omega, int n);

/// The skew-product transfer operator L_eps = ell~_theta o (fiberwise L(f_eps(omega)))
/// on a fixed base representation, with the fiber matrices assembled once.
///
/// Fibers with identical maps share one matrix. When every fiber map equals
/// the same map, Constant observables stay Constant. For the shift base the
/// output of ell~_theta (depth d-1) is re-padded to depth d.
class SkewOperator {
public:
    SkewOperator(const RandomMapFamily& fam, const BaseSystem& base, const Representation& rep,
                 int truncation);

    const BaseSystem& base() const noexcept { return base_; }
    const Representation& representation() const noexcept { return rep_; }
    int truncation() const noexcept { return truncation_; }
    /// True when all fiber maps are the same map.
    bool uniform() const noexcept { return matrices_.size() == 1; }
    /// Fiber operator at representation point i.
    const OperatorMatrix& fiber_operator(int i) const { return matrices_[index_.at(i)]; }

    RandomObservable apply(const RandomObservable& u) const;

private:
    BaseSystem base_;
    Representation rep_;
    int truncation_;
    std::vector<OperatorMatrix> matrices_;
    std::vector<int> index_;
};

/// One application of L_eps. Constant U uses the base's default
/// representation (grid 256, depth 6).
RandomObservable skew_apply(const RandomMapFamily& fam, const BaseSystem& base,
                            const RandomObservable& u);

struct FixedDensity {
    RandomObservable rho;
    double lambda_bar = 1.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Power iteration of L_eps from the constant 1, renormalizing the mean fiber
/// integral to 1 each step. Converged when successive iterates differ by
/// less than `tol` in max-over-omega C^1 norm. Throws NumericalError after
/// `max_iter` steps or if the density dips below -1e-8 anywhere on the grid.
FixedDensity skew_fixed_density(const SkewOperator& op, double tol = 1e-12, int max_iter = 10000);
FixedDensity skew_fixed_density(const RandomMapFamily& fam, const BaseSystem& base,
                                const Representation& rep, int truncation, double tol = 1e-12);

} // namespace fiberspec

#endif
