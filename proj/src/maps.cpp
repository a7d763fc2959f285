#include "fiberspec/maps.hpp"

#include "fiberspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fiberspec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kValidationGrid = 4096;
constexpr double kNewtonTol = 1e-13;
constexpr int kNewtonMaxIter = 60;

double wrap(double x)
{
    double y = x - std::floor(x);
    return y >= 1.0 ? 0.0 : y;
}

} // namespace

CircleMap::CircleMap(int degree, std::vector<LiftMode> modes, double r, double shift)
    : degree_(degree), modes_(std::move(modes)), r_(r), shift_(shift)
{
    if (degree_ < 2)
        throw ConfigError("CircleMap: degree must be >= 2");
    if (!(r_ > 1.0))
        throw ConfigError("CircleMap: r must be > 1");
    for (const auto& m : modes_)
        if (m.k < 1)
            throw ConfigError("CircleMap: mode index k must be >= 1");
    min_derivative_ = derivative(0.0);
    max_derivative_ = min_derivative_;
    for (int j = 1; j < kValidationGrid; ++j) {
        const double d = derivative(static_cast<double>(j) / kValidationGrid);
        min_derivative_ = std::min(min_derivative_, d);
        max_derivative_ = std::max(max_derivative_, d);
    }
    if (!(min_derivative_ > 1.0))
        throw ConfigError("CircleMap: not expanding (min F' = " + std::to_string(min_derivative_) +
                          ")");
}

double CircleMap::lift(double x) const
{
    double v = degree_ * x + shift_;
    for (const auto& m : modes_) {
        const double t = kTwoPi * m.k * x;
        v += (m.a * std::sin(t) + m.b * std::cos(t)) / (kTwoPi * m.k);
    }
    return v;
}

double CircleMap::operator()(double x) const { return wrap(lift(x)); }

double CircleMap::derivative(double x) const
{
    double v = degree_;
    for (const auto& m : modes_) {
        const double t = kTwoPi * m.k * x;
        v += m.a * std::cos(t) - m.b * std::sin(t);
    }
    return v;
}

double CircleMap::second_derivative(double x) const
{
    double v = 0.0;
    for (const auto& m : modes_) {
        const double t = kTwoPi * m.k * x;
        v -= kTwoPi * m.k * (m.a * std::sin(t) + m.b * std::cos(t));
    }
    return v;
}

double CircleMap::solve_lift(double target, double lo, double hi) const
{
    double flo = lift(lo) - target;
    double fhi = lift(hi) - target;
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    double y = lo - flo * (hi - lo) / (fhi - flo);
    if (!(y > lo && y < hi))
        y = 0.5 * (lo + hi);
    double res = 0.0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        res = lift(y) - target;
        if (std::abs(res) < kNewtonTol)
            return y;
        if (res < 0.0)
            lo = y;
        else
            hi = y;
        double next = y - res / derivative(y);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (next == y || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y)))
            return next;
        y = next;
    }
    throw NumericalError("CircleMap::solve_lift: Newton did not converge", std::abs(res));
}

std::vector<Preimage> CircleMap::preimages(double x) const
{
    // F maps [0, 1) monotonically onto [F(0), F(0) + degree); the preimages of
    // x are the solutions of F(y) = x + j for the `degree` integers j with
    // x + j in that range.
    const double f0 = lift(0.0);
    const double j0 = std::ceil(f0 - x);
    std::vector<Preimage> out;
    out.reserve(degree_);
    for (int j = 0; j < degree_; ++j) {
        const double target = x + j0 + j;
        double y = solve_lift(target, 0.0, 1.0);
        if (y >= 1.0)
            y = 0.0;
        out.push_back({y, derivative(y)});
    }
    return out;
}

std::vector<double> CircleMap::inverse_branches(double x) const
{
    std::vector<double> ys;
    for (const auto& p : preimages(x))
        ys.push_back(p.y);
    return ys;
}

ComposedMap::ComposedMap(std::vector<CircleMap> maps) : maps_(std::move(maps)), degree_(1)
{
    if (maps_.empty())
        throw ConfigError("compose: empty map list");
    for (const auto& m : maps_) {
        degree_ *= m.degree();
        if (degree_ > kMaxBranches)
            throw ConfigError("compose: branch count exceeds 2^20");
    }
}

double ComposedMap::lift(double x) const
{
    for (const auto& m : maps_)
        x = m.lift(x);
    return x;
}

double ComposedMap::operator()(double x) const
{
    for (const auto& m : maps_)
        x = m(x);
    return x;
}

double ComposedMap::derivative(double x) const
{
    double d = 1.0;
    for (const auto& m : maps_) {
        d *= m.derivative(x);
        x = m(x);
    }
    return d;
}

std::vector<Preimage> ComposedMap::preimages(double x) const
{
    std::vector<Preimage> level{{x, 1.0}};
    for (auto it = maps_.rbegin(); it != maps_.rend(); ++it) {
        std::vector<Preimage> next;
        next.reserve(level.size() * it->degree());
        for (const auto& p : level)
            for (const auto& q : it->preimages(p.y))
                next.push_back({q.y, q.derivative * p.derivative});
        level = std::move(next);
    }
    std::sort(level.begin(), level.end(),
              [](const Preimage& a, const Preimage& b) { return a.y < b.y; });
    return level;
}

std::vector<double> ComposedMap::inverse_branches(double x) const
{
    std::vector<double> ys;
    for (const auto& p : preimages(x))
        ys.push_back(p.y);
    return ys;
}

ComposedMap compose(std::vector<CircleMap> maps) { return ComposedMap(std::move(maps)); }

namespace {

void accumulate_branches(const CircleMap& map, double x, double jacobian, int level, int m_max,
                         double exponent, std::vector<double>& sums)
{
    for (const auto& p : map.preimages(x)) {
        const double d = jacobian * p.derivative;
        sums[level] += std::pow(d, -exponent);
        if (level + 1 < m_max)
            accumulate_branches(map, p.y, d, level + 1, m_max, exponent, sums);
    }
}

} // namespace

ExpandingConstantEstimate expanding_constant(const CircleMap& map, double r, int m_max, int grid_n)
{
    if (m_max < 1)
        throw ConfigError("expanding_constant: m_max must be >= 1");
    if (grid_n < 64)
        throw ConfigError("expanding_constant: grid_n must be >= 64");
    long long branches = 1;
    for (int m = 0; m < m_max; ++m) {
        branches *= map.degree();
        if (branches > ComposedMap::kMaxBranches)
            throw ConfigError("expanding_constant: degree^m_max exceeds 2^20");
    }

    // |D f_y^{-m}(x)|^r / |det D f^m(y)| = |(f^m)'(y)|^{-(r+1)} in one dimension.
    std::vector<double> sup_sums(m_max, 0.0);
    std::vector<double> sums(m_max);
    for (int j = 0; j < grid_n; ++j) {
        std::fill(sums.begin(), sums.end(), 0.0);
        accumulate_branches(map, static_cast<double>(j) / grid_n, 1.0, 0, m_max, r + 1.0, sums);
        for (int m = 0; m < m_max; ++m)
            sup_sums[m] = std::max(sup_sums[m], sums[m]);
    }

    ExpandingConstantEstimate est;
    est.per_m.resize(m_max);
    for (int m = 1; m <= m_max; ++m)
        est.per_m[m - 1] = std::pow(sup_sums[m - 1], 1.0 / m);
    const int first = (m_max + 1) / 2;
    est.value = *std::max_element(est.per_m.begin() + (first - 1), est.per_m.end());
    est.warning = est.value >= 1.0;
    return est;
}

} // namespace fiberspec
