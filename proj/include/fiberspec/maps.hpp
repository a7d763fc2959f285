#ifndef FIBERSPEC_MAPS_HPP
#define FIBERSPEC_MAPS_HPP

#include <vector>

namespace fiberspec {

/// One perturbation term of a circle-map lift:
/// g(x) += [a sin(2 pi k x) + b cos(2 pi k x)] / (2 pi k).
/// Its contribution to the derivative is a cos(2 pi k x) - b sin(2 pi k x).
struct LiftMode {
    int k;
    double a;
    double b;

    bool operator==(const LiftMode&) const = default;
};

/// A preimage y of a point x together with the derivative of the map at y.
struct Preimage {
    double y;
    double derivative;
};

/// Expanding map of S^1 = R/Z given by its lift
///   F(x) = degree * x + shift + g(x),
/// where g is a trigonometric polynomial. F(x + 1) = F(x) + degree holds by
/// construction; the constructor rejects maps with inf F' <= 1.
///
/// `shift` is a constant offset of the lift (used by additive noise); it
/// leaves the derivative unchanged.
class CircleMap {
public:
    CircleMap(int degree, std::vector<LiftMode> modes = {}, double r = 2.0, double shift = 0.0);

    static CircleMap linear(int degree) { return CircleMap(degree); }

    int degree() const noexcept { return degree_; }
    const std::vector<LiftMode>& modes() const noexcept { return modes_; }
    double r() const noexcept { return r_; }
    double shift() const noexcept { return shift_; }

    double lift(double x) const;
    /// F(x) mod 1, in [0, 1).
    double operator()(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    /// Minimum / maximum of F' over the 4096-point validation grid.
    double min_derivative() const noexcept { return min_derivative_; }
    double max_derivative() const noexcept { return max_derivative_; }

    /// The `degree` preimages of x in increasing order, with F' at each.
    std::vector<Preimage> preimages(double x) const;
    std::vector<double> inverse_branches(double x) const;

    /// Solve F(y) = target for y in [lo, hi], given F(lo) <= target <= F(hi).
    /// Newton with bisection fallback; residual < 1e-13 within 60 steps.
    double solve_lift(double target, double lo, double hi) const;

    bool operator==(const CircleMap& o) const
    {
        return degree_ == o.degree_ && modes_ == o.modes_ && r_ == o.r_ && shift_ == o.shift_;
    }

private:
    int degree_;
    std::vector<LiftMode> modes_;
    double r_;
    double shift_;
    double min_derivative_ = 0.0;
    double max_derivative_ = 0.0;
};

/// f_n o ... o f_1 for the list [f_1, ..., f_n]: the first element is
/// applied first.
class ComposedMap {
public:
    static constexpr long long kMaxBranches = 1LL << 20;

    explicit ComposedMap(std::vector<CircleMap> maps);

    const std::vector<CircleMap>& maps() const noexcept { return maps_; }
    /// Topological degree of the composition (product of degrees).
    long long degree() const noexcept { return degree_; }

    double lift(double x) const;
    double operator()(double x) const;
    double derivative(double x) const;
    std::vector<Preimage> preimages(double x) const;
    std::vector<double> inverse_branches(double x) const;

private:
    std::vector<CircleMap> maps_;
    long long degree_;
};

ComposedMap compose(std::vector<CircleMap> maps);

struct ExpandingConstantEstimate {
    /// max of S_m^{1/m} over m in [ceil(m_max/2), m_max]
    double value = 0.0;
    /// S_m^{1/m} for m = 1..m_max (index m-1)
    std::vector<double> per_m;
    /// set when value >= 1: the map is too weakly expanding for this m_max
    bool warning = false;
};

/// Estimate of Lambda_r(f) = limsup_m (sup_x sum_{f^m y = x} |(f^m)'(y)|^{-r-1})^{1/m}.
ExpandingConstantEstimate expanding_constant(const CircleMap& map, double r, int m_max = 8,
                                             int grid_n = 256);

} // namespace fiberspec

#endif
