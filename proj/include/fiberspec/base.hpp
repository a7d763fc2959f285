#ifndef FIBERSPEC_BASE_HPP
#define FIBERSPEC_BASE_HPP

#include "fiberspec/fiber_function.hpp"

#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace fiberspec {

/// Finite symbol word (w_0 w_1 ... w_{n-1}) of the one-sided shift.
using Word = std::vector<int>;
/// A point of the base space: omega in [0,1) or a symbol word.
using BasePoint = std::variant<double, Word>;

/// Equispaced grid omega_i = i / size on [0, 1).
struct OmegaGrid {
    int size;
    bool operator==(const OmegaGrid&) const = default;
};

/// Cylinder functions of the first `depth` symbols over `alphabet` letters.
/// Word index is sum_i w_i * alphabet^(depth-1-i) (w_0 most significant).
struct Cylinder {
    int alphabet;
    int depth;
    int words() const;
    bool operator==(const Cylinder&) const = default;
};

using Representation = std::variant<OmegaGrid, Cylinder>;

int representation_size(const Representation& rep);

/// A complex scalar function on the base, sampled on a representation.
struct ScalarField {
    Representation rep;
    std::vector<cplx> values;
};

/// The base transfer operator as a sparse linear map between representations:
/// out[i] = sum_{(j, w) in rows[i]} w * in[j].
struct TransferStencil {
    Representation input;
    Representation output;
    std::vector<std::vector<std::pair<int, double>>> rows;
};

/// Measure-preserving base dynamics (theta, P) with its transfer operator.
///
/// Three variants are supported:
///  - Invertible: rotation omega -> omega + alpha on [0,1), P = Lebesgue.
///  - PiecewiseSmooth: a full-branch piecewise affine map with branch
///    domains [b_j, b_{j+1}) and invariant density p (uniform by default).
///  - OneSidedShift: Bernoulli shift over K symbols with weights p_a.
///
/// On grids, off-grid evaluations use periodic linear interpolation.
class BaseSystem {
public:
    enum class Variant { Invertible, PiecewiseSmooth, OneSidedShift };

    static BaseSystem rotation(double alpha);
    static BaseSystem piecewise_doubling();
    /// breaks: 0 = b_0 < b_1 < ... < b_k = 1. density: samples of p on an
    /// equispaced grid (empty means p = 1, which is invariant for full affine
    /// branches).
    static BaseSystem piecewise_affine(std::vector<double> breaks, std::vector<double> density = {});
    static BaseSystem shift(std::vector<double> probabilities);

    Variant variant() const noexcept { return variant_; }
    double alpha() const noexcept { return alpha_; }
    const std::vector<double>& breaks() const noexcept { return breaks_; }
    const std::vector<double>& density() const noexcept { return density_; }
    const std::vector<double>& probabilities() const noexcept { return probs_; }
    int alphabet() const noexcept { return static_cast<int>(probs_.size()); }

    /// theta(omega). For words, drops the first symbol.
    BasePoint apply(const BasePoint& omega) const;

    /// OmegaGrid{grid} for interval bases, Cylinder{K, depth} for the shift.
    Representation representation(int grid, int depth) const;
    /// Throws ConfigError if `rep` does not fit this base.
    void check(const Representation& rep) const;

    TransferStencil stencil(const Representation& input) const;
    /// P-weights of the representation points; they sum to 1.
    std::vector<double> weights(const Representation& rep) const;
    /// The base point represented by index i.
    BasePoint point(const Representation& rep, int i) const;
    /// Index of the representation point nearest to omega.
    int nearest(const Representation& rep, const BasePoint& omega) const;

    /// phi o theta on `output`. For the shift, `phi` lives at depth d-1 and
    /// the result at depth d = output.depth.
    ScalarField pullback(const ScalarField& phi, const Representation& output) const;

    /// Invariant density p at omega (PiecewiseSmooth; 1 otherwise).
    double p_at(double omega) const;

private:
    BaseSystem() = default;

    Variant variant_ = Variant::Invertible;
    double alpha_ = 0.0;
    std::vector<double> breaks_;
    std::vector<double> density_;
    std::vector<double> probs_;
};

/// A random observable omega -> u(omega) in C^{r-1}(S^1).
class RandomObservable {
public:
    enum class Kind { Constant, OmegaGrid, Cylinder };

    static RandomObservable constant(FiberFunction u);
    static RandomObservable on(const Representation& rep, std::vector<FiberFunction> fibers);

    Kind kind() const noexcept;
    /// nullopt for Constant.
    const std::optional<Representation>& representation() const noexcept { return rep_; }

    int size() const noexcept { return static_cast<int>(fibers_.size()); }
    const FiberFunction& fiber(int i) const { return fibers_.at(i); }
    std::span<const FiberFunction> fibers() const noexcept { return fibers_; }
    std::span<FiberFunction> fibers() noexcept { return fibers_; }
    int truncation() const noexcept { return fibers_.front().truncation(); }

    /// Constants are expanded onto `rep`; other kinds must already match.
    RandomObservable promoted(const Representation& rep) const;
    /// Cylinder of depth d < target re-expressed at depth `target`
    /// (independent of the appended symbols).
    RandomObservable padded(int target_depth) const;

    /// ess-sup over omega of the C^1 norm, as a max over stored fibers.
    double linf_norm() const;
    std::vector<cplx> fiber_integrals() const;
    /// Scalar field omega -> U(omega)_k (Fourier coefficient k).
    ScalarField coefficient_field(int k) const;
    /// Scalar field omega -> U(omega, x).
    ScalarField values_at(double x) const;

    /// Fiber at the representation point nearest omega.
    const FiberFunction& at(const BaseSystem& base, const BasePoint& omega) const;

private:
    std::optional<Representation> rep_;
    std::vector<FiberFunction> fibers_;
};

/// The base transfer operator ell_theta on a scalar field.
ScalarField base_transfer(const BaseSystem& base, const ScalarField& u);
/// The lifted operator acting coefficient-wise on a random observable.
RandomObservable base_lift_transfer(const BaseSystem& base, const RandomObservable& u);
/// max over representation points of |int U(omega) dm - mean_omega int U dm|.
double kp_defect(const RandomObservable& u);
/// <a, b>_P = int a * b dP over the representation.
cplx p_inner(const BaseSystem& base, const ScalarField& a, const ScalarField& b);

} // namespace fiberspec

#endif
