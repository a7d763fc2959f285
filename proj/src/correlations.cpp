#include "fiberspec/correlations.hpp"

#include "fiberspec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fiberspec {

namespace {

constexpr double kKpTolerance = 1e-8;
constexpr double kFlagGap = 0.1;

/// U - rho(.) * int U dm, on the coarsest representation that holds both.
RandomObservable project_out(const SkewOperator& op, const RandomObservable& rho,
                             const RandomObservable& u)
{
    if (rho.kind() == RandomObservable::Kind::Constant &&
        u.kind() == RandomObservable::Kind::Constant) {
        const FiberFunction& f = u.fiber(0);
        return RandomObservable::constant(f - rho.fiber(0) * f.integral());
    }
    const RandomObservable r = rho.promoted(op.representation());
    const RandomObservable v = u.promoted(op.representation());
    std::vector<FiberFunction> out;
    out.reserve(v.size());
    for (int i = 0; i < v.size(); ++i)
        out.push_back(v.fiber(i) - r.fiber(i) * v.fiber(i).integral());
    return RandomObservable::on(op.representation(), std::move(out));
}

const FiberFunction& fiber_or_constant(const RandomObservable& u, int i)
{
    return u.kind() == RandomObservable::Kind::Constant ? u.fiber(0) : u.fiber(i);
}

} // namespace

std::vector<std::vector<double>> backward_corr_at(const SkewOperator& op,
                                                  const RandomObservable& rho,
                                                  const FiberFunction& phi,
                                                  const FiberFunction& u,
                                                  std::span<const int> indices, int n_max)
{
    if (n_max < 1)
        throw ConfigError("backward_corr: n_max must be >= 1");
    const int size = representation_size(op.representation());
    for (int i : indices)
        if (i < 0 || i >= size)
            throw ConfigError("backward_corr: representation index out of range");
    std::vector<std::vector<double>> out(indices.size());
    RandomObservable w = project_out(op, rho, RandomObservable::constant(u));
    for (int n = 1; n <= n_max; ++n) {
        w = op.apply(w);
        for (std::size_t j = 0; j < indices.size(); ++j)
            out[j].push_back(pair(phi, fiber_or_constant(w, indices[j])).real());
    }
    return out;
}

std::vector<double> backward_corr(const SkewOperator& op, const RandomObservable& rho,
                                  const FiberFunction& phi, const FiberFunction& u,
                                  const BasePoint& omega, int n_max)
{
    const int idx[] = {op.base().nearest(op.representation(), omega)};
    return std::move(backward_corr_at(op, rho, phi, u, idx, n_max).front());
}

std::vector<double> backward_corr(const RandomMapFamily& fam, const BaseSystem& base,
                                  const RandomObservable& rho, const FiberFunction& phi,
                                  const FiberFunction& u, const BasePoint& omega, int n_max)
{
    // Constant rho uses the same default representation as skew_apply.
    const Representation rep = rho.representation() ? *rho.representation() : base.representation(256, 6);
    const SkewOperator op(fam, base, rep, rho.truncation());
    return backward_corr(op, rho, phi, u, omega, n_max);
}

std::vector<double> integrated_corr(const SkewOperator& op, const RandomObservable& rho,
                                    const RandomObservable& phi, const RandomObservable& u,
                                    int n_max)
{
    if (n_max < 1)
        throw ConfigError("integrated_corr: n_max must be >= 1");
    if (!(kp_defect(u) < kKpTolerance))
        throw ConfigError("integrated_corr: U is not in K_P (fiber integrals vary with omega)");
    const RandomObservable phis = phi.kind() == RandomObservable::Kind::Constant
                                      ? phi
                                      : phi.promoted(op.representation());
    const std::vector<double> weights = op.base().weights(op.representation());
    RandomObservable w = project_out(op, rho, u);
    std::vector<double> out;
    out.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) {
        w = op.apply(w);
        if (w.kind() == RandomObservable::Kind::Constant &&
            phis.kind() == RandomObservable::Kind::Constant) {
            out.push_back(pair(phis.fiber(0), w.fiber(0)).real());
            continue;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            s += weights[i] * pair(fiber_or_constant(phis, static_cast<int>(i)),
                                   fiber_or_constant(w, static_cast<int>(i)))
                                  .real();
        out.push_back(s);
    }
    return out;
}

std::vector<double> deterministic_corr(const OperatorMatrix& op, const FiberFunction& rho0,
                                       const FiberFunction& phi, const FiberFunction& u,
                                       int n_max)
{
    if (n_max < 1)
        throw ConfigError("deterministic_corr: n_max must be >= 1");
    FiberFunction w = u - rho0 * u.integral();
    std::vector<double> out;
    out.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) {
        w = op.apply(w);
        out.push_back(pair(phi, w).real());
    }
    return out;
}

DecayFit fit_decay_rate(std::span<const double> seq, double floor)
{
    if (seq.size() < 4)
        throw ConfigError("fit_decay_rate: need at least 4 terms");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (std::abs(seq[i]) > floor) {
            xs.push_back(static_cast<double>(i + 1));
            ys.push_back(std::log(std::abs(seq[i])));
        }
    }

    DecayFit fit;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (std::abs(seq[i]) > floor && std::abs(seq[i + 1]) > floor)
            fit.max_ratio = std::max(fit.max_ratio, std::abs(seq[i + 1] / seq[i]));
    if (xs.size() < 3) {
        fit.flagged = std::abs(fit.max_ratio - fit.tau) > kFlagGap;
        return fit;
    }

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    fit.tau = std::exp(slope);
    fit.C = std::exp(intercept);
    for (std::size_t i = 0; i < xs.size(); ++i)
        fit.envelope_C = std::max(fit.envelope_C, std::exp(ys[i] - slope * xs[i]));
    fit.flagged = std::abs(fit.max_ratio - fit.tau) > kFlagGap;
    return fit;
}

} // namespace fiberspec
