#include "fiberspec/skewprod.hpp"

#include "fiberspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fiberspec {

namespace {

constexpr int kDefaultGrid = 256;
constexpr int kDefaultDepth = 6;
constexpr double kNegativityFloor = -1e-8;

cplx mean_integral(const RandomObservable& u)
{
    cplx s = 0.0;
    for (const auto& f : u.fibers())
        s += f.integral();
    return s / static_cast<double>(u.size());
}

} // namespace

NoiseProfile NoiseProfile::default_for(const BaseSystem& base)
{
    NoiseProfile p;
    if (base.variant() != BaseSystem::Variant::OneSidedShift)
        return p;
    const int k = base.alphabet();
    if (k == 1) {
        p.levels = {0.0};
        return p;
    }
    for (int a = 0; a < k; ++a)
        p.levels.push_back(-1.0 + 2.0 * a / (k - 1));
    return p;
}

double NoiseProfile::operator()(const BasePoint& omega) const
{
    if (const auto* x = std::get_if<double>(&omega))
        return std::cos(2.0 * std::numbers::pi * *x);
    const auto& w = std::get<Word>(omega);
    if (w.empty())
        throw ConfigError("noise profile: empty symbol word");
    if (w.front() < 0 || w.front() >= static_cast<int>(levels.size()))
        throw ConfigError("noise profile: no level for symbol " + std::to_string(w.front()));
    return levels[w.front()];
}

RandomMapFamily::RandomMapFamily(CircleMap f0, NoiseKind kind, NoiseProfile profile, double eps)
    : f0_(std::move(f0)), kind_(kind), profile_(std::move(profile)), eps_(eps)
{
    if (!(eps_ >= 0.0) || !std::isfinite(eps_))
        throw ConfigError("RandomMapFamily: epsilon must be finite and >= 0");
    for (double v : profile_.levels)
        if (!(std::abs(v) <= 1.0))
            throw ConfigError("RandomMapFamily: noise levels must lie in [-1, 1]");
    if (const auto* p = std::get_if<ParametricNoise>(&kind_); p && p->k < 1)
        throw ConfigError("RandomMapFamily: parametric mode index must be >= 1");
    const double emax = eps_max();
    if (!(eps_ < emax))
        throw ConfigError("RandomMapFamily: epsilon " + std::to_string(eps_) +
                          " is not below eps_max " + std::to_string(emax));
}

double RandomMapFamily::eps_max(const CircleMap& f0, const NoiseKind& kind)
{
    if (std::holds_alternative<AdditiveNoise>(kind))
        return std::numeric_limits<double>::infinity();
    return f0.min_derivative() - 1.0;
}

double RandomMapFamily::lipschitz(const NoiseKind& kind)
{
    if (std::holds_alternative<AdditiveNoise>(kind))
        return 1.0;
    // |dg| + |dg'| + |dg''| for dg = eps s [sin or cos](2 pi k x) / (2 pi k)
    const double w = 2.0 * std::numbers::pi * std::get<ParametricNoise>(kind).k;
    return 1.0 / w + 1.0 + w;
}

CircleMap RandomMapFamily::fiber_map(const BasePoint& omega) const
{
    const double v = eps_ * profile_(omega);
    if (v == 0.0)
        return f0_;
    if (std::holds_alternative<AdditiveNoise>(kind_))
        return CircleMap(f0_.degree(), f0_.modes(), f0_.r(), f0_.shift() + v);
    const auto& p = std::get<ParametricNoise>(kind_);
    auto modes = f0_.modes();
    auto it = std::find_if(modes.begin(), modes.end(), [&](const LiftMode& m) { return m.k == p.k; });
    if (it == modes.end()) {
        modes.push_back({p.k, 0.0, 0.0});
        it = modes.end() - 1;
    }
    (p.coefficient == ParametricNoise::Coefficient::A ? it->a : it->b) += v;
    return CircleMap(f0_.degree(), std::move(modes), f0_.r(), f0_.shift());
}

RandomMapFamily RandomMapFamily::with_epsilon(double eps) const
{
    return RandomMapFamily(f0_, kind_, profile_, eps);
}

ComposedMap fiber_compose_n(const RandomMapFamily& fam, const BaseSystem& base,
                            const BasePoint& omega, int n)
{
    if (n < 1)
        throw ConfigError("fiber_compose_n: n must be >= 1");
    std::vector<CircleMap> maps;
    maps.reserve(n);
    BasePoint w = omega;
    for (int j = 0; j < n; ++j) {
        maps.push_back(fam.fiber_map(w));
        if (j + 1 < n)
            w = base.apply(w);
    }
    return compose(std::move(maps));
}

SkewOperator::SkewOperator(const RandomMapFamily& fam, const BaseSystem& base,
                           const Representation& rep, int truncation)
    : base_(base), rep_(rep), truncation_(truncation)
{
    base_.check(rep_);
    if (const auto* c = std::get_if<Cylinder>(&rep_); c && c->depth < 1)
        throw ConfigError("SkewOperator: cylinder depth must be >= 1");
    const int n = representation_size(rep_);
    std::vector<CircleMap> maps;
    index_.resize(n);
    for (int i = 0; i < n; ++i) {
        CircleMap f = fam.fiber_map(base_.point(rep_, i));
        auto it = std::find(maps.begin(), maps.end(), f);
        if (it == maps.end()) {
            index_[i] = static_cast<int>(maps.size());
            maps.push_back(std::move(f));
        } else {
            index_[i] = static_cast<int>(it - maps.begin());
        }
    }
    matrices_.reserve(maps.size());
    for (const auto& f : maps)
        matrices_.push_back(assemble_fourier(f, truncation_));
}

RandomObservable SkewOperator::apply(const RandomObservable& u) const
{
    if (u.truncation() != truncation_)
        throw ConfigError("SkewOperator: truncation mismatch");
    if (u.kind() == RandomObservable::Kind::Constant && uniform())
        return RandomObservable::constant(matrices_.front().apply(u.fiber(0)));
    const RandomObservable in = u.promoted(rep_);
    std::vector<FiberFunction> out;
    out.reserve(in.size());
    for (int i = 0; i < in.size(); ++i)
        out.push_back(matrices_[index_[i]].apply(in.fiber(i)));
    RandomObservable lifted = base_lift_transfer(base_, RandomObservable::on(rep_, std::move(out)));
    if (const auto* c = std::get_if<Cylinder>(&rep_))
        return lifted.padded(c->depth);
    return lifted;
}

RandomObservable skew_apply(const RandomMapFamily& fam, const BaseSystem& base,
                            const RandomObservable& u)
{
    const Representation rep = u.representation()
                                   ? *u.representation()
                                   : base.representation(kDefaultGrid, kDefaultDepth);
    return SkewOperator(fam, base, rep, u.truncation()).apply(u);
}

FixedDensity skew_fixed_density(const SkewOperator& op, double tol, int max_iter)
{
    if (!(tol > 0.0))
        throw ConfigError("skew_fixed_density: tol must be positive");
    RandomObservable u = RandomObservable::constant(FiberFunction::constant(op.truncation(), 1.0));
    double diff = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        RandomObservable next = op.apply(u);
        const cplx before = mean_integral(u);
        const cplx after = mean_integral(next);
        const cplx scale = 1.0 / after;
        for (auto& f : next.fibers())
            f *= scale;
        diff = 0.0;
        const bool same_shape = next.size() == u.size();
        for (int i = 0; i < next.size(); ++i)
            diff = std::max(diff, (next.fiber(i) - u.fiber(same_shape ? i : 0)).c1_norm());
        u = std::move(next);
        if (diff < tol) {
            const int grid = oversampled_grid(op.truncation());
            double lowest = std::numeric_limits<double>::infinity();
            for (const auto& f : u.fibers())
                for (const auto& v : f.samples(grid))
                    lowest = std::min(lowest, v.real());
            if (lowest < kNegativityFloor)
                throw NumericalError("skew_fixed_density: negative density (invalid discretization)",
                                     lowest);
            return {std::move(u), (after / before).real(), it, diff};
        }
    }
    throw NumericalError("skew_fixed_density: power iteration did not converge", diff);
}

FixedDensity skew_fixed_density(const RandomMapFamily& fam, const BaseSystem& base,
                                const Representation& rep, int truncation, double tol)
{
    return skew_fixed_density(SkewOperator(fam, base, rep, truncation), tol);
}

} // namespace fiberspec
