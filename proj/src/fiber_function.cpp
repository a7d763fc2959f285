#include "fiberspec/fiber_function.hpp"

#include "fiberspec/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace fiberspec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per (size, sign) with FFTW_UNALIGNED so that any
// std::vector storage can be passed to fftw_execute_dft.
class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int size, int sign)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(size, sign);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        std::vector<cplx> in(size), out(size);
        fftw_plan plan = fftw_plan_dft_1d(size, reinterpret_cast<fftw_complex*>(in.data()),
                                          reinterpret_cast<fftw_complex*>(out.data()), sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

void execute(std::vector<cplx>& in, std::vector<cplx>& out, int sign)
{
    fftw_plan plan = PlanCache::instance().get(static_cast<int>(in.size()), sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

struct Jet {
    cplx value;
    cplx d1;
    cplx d2;
};

Jet evaluate_jet(std::span<const cplx> c, int n, double x)
{
    // Horner-free direct sum with a phase recurrence; |k| <= n is small.
    const cplx z = unit_phase(1, x);
    const cplx zinv = std::conj(z);
    Jet jet{c[n], 0.0, 0.0};
    cplx zp = 1.0, zm = 1.0;
    for (int k = 1; k <= n; ++k) {
        zp *= z;
        zm *= zinv;
        const double w = kTwoPi * k;
        const cplx tp = c[n + k] * zp;
        const cplx tm = c[n - k] * zm;
        jet.value += tp + tm;
        jet.d1 += cplx(0.0, w) * (tp - tm);
        jet.d2 += -w * w * (tp + tm);
    }
    return jet;
}

double refine_local_max(std::span<const cplx> c, int n, double lo, double hi, double x0)
{
    // Maximize g = |u|^2 on [lo, hi] by Newton on g' with bisection fallback.
    double x = x0;
    double best = std::abs(evaluate_jet(c, n, x0).value);
    for (int it = 0; it < 40; ++it) {
        const Jet j = evaluate_jet(c, n, x);
        const double g1 = 2.0 * std::real(std::conj(j.value) * j.d1);
        const double g2 = 2.0 * (std::norm(j.d1) + std::real(std::conj(j.value) * j.d2));
        if (g1 > 0.0)
            lo = x;
        else
            hi = x;
        double next = (g2 < 0.0) ? x - g1 / g2 : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        const bool done = std::abs(next - x) < 1e-15 || hi - lo < 1e-15;
        x = next;
        best = std::max(best, std::abs(evaluate_jet(c, n, x).value));
        if (done)
            break;
    }
    return best;
}

} // namespace

cplx unit_phase(int k, double y)
{
    double t = static_cast<double>(k) * y;
    t -= std::floor(t);
    return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)};
}

int oversampled_grid(int truncation) { return std::max(4 * truncation, 16); }

FiberFunction::FiberFunction(int truncation) : n_(truncation), c_(2 * truncation + 1, 0.0)
{
    if (truncation < 0)
        throw ConfigError("FiberFunction: negative truncation");
}

FiberFunction::FiberFunction(int truncation, std::vector<cplx> coeffs)
    : n_(truncation), c_(std::move(coeffs))
{
    if (truncation < 0 || c_.size() != static_cast<std::size_t>(2 * truncation + 1))
        throw ConfigError("FiberFunction: coefficient count must be 2N+1");
}

FiberFunction FiberFunction::constant(int truncation, double value)
{
    FiberFunction u(truncation);
    u.coeff(0) = value;
    return u;
}

FiberFunction FiberFunction::trig(int truncation, double c0, std::span<const TrigTerm> terms)
{
    FiberFunction u = constant(truncation, c0);
    for (const auto& t : terms) {
        if (t.k < 1 || t.k > truncation)
            throw ConfigError("FiberFunction::trig: mode index out of range");
        // a cos + b sin = (a - i b)/2 e_k + (a + i b)/2 e_{-k}
        u.coeff(t.k) += cplx(0.5 * t.a, -0.5 * t.b);
        u.coeff(-t.k) += cplx(0.5 * t.a, 0.5 * t.b);
    }
    return u;
}

FiberFunction FiberFunction::mode(int truncation, int k)
{
    FiberFunction u(truncation);
    u.coeff(k) = 1.0;
    return u;
}

FiberFunction FiberFunction::from_samples(int truncation, std::span<const cplx> samples)
{
    const int m = static_cast<int>(samples.size());
    if (m < 2 * truncation + 1)
        throw ConfigError("FiberFunction::from_samples: grid too coarse for truncation");
    std::vector<cplx> in(samples.begin(), samples.end()), out(m);
    execute(in, out, FFTW_FORWARD);
    FiberFunction u(truncation);
    const double scale = 1.0 / m;
    for (int k = -truncation; k <= truncation; ++k)
        u.coeff(k) = out[((k % m) + m) % m] * scale;
    return u;
}

cplx FiberFunction::coeff(int k) const
{
    if (k < -n_ || k > n_)
        return 0.0;
    return c_[k + n_];
}

cplx& FiberFunction::coeff(int k)
{
    if (k < -n_ || k > n_)
        throw ConfigError("FiberFunction::coeff: index out of range");
    return c_[k + n_];
}

cplx FiberFunction::operator()(double x) const { return evaluate_jet(c_, n_, x).value; }

cplx FiberFunction::derivative_at(double x) const { return evaluate_jet(c_, n_, x).d1; }

FiberFunction FiberFunction::derivative() const
{
    FiberFunction d(n_);
    for (int k = -n_; k <= n_; ++k)
        d.coeff(k) = cplx(0.0, kTwoPi * k) * coeff(k);
    return d;
}

FiberFunction FiberFunction::resized(int truncation) const
{
    FiberFunction u(truncation);
    const int m = std::min(truncation, n_);
    for (int k = -m; k <= m; ++k)
        u.coeff(k) = coeff(k);
    return u;
}

std::vector<cplx> FiberFunction::samples(int grid_size) const
{
    std::vector<cplx> bins(grid_size, 0.0), out(grid_size);
    for (int k = -n_; k <= n_; ++k)
        bins[((k % grid_size) + grid_size) % grid_size] += coeff(k);
    execute(bins, out, FFTW_BACKWARD);
    return out;
}

double FiberFunction::grid_sup() const
{
    double s = 0.0;
    for (const cplx& v : samples(oversampled_grid(n_)))
        s = std::max(s, std::abs(v));
    return s;
}

double FiberFunction::sup_norm() const
{
    const int m = oversampled_grid(n_);
    const std::vector<cplx> vals = samples(m);
    std::vector<double> mag(m);
    double grid_max = 0.0;
    for (int j = 0; j < m; ++j) {
        mag[j] = std::abs(vals[j]);
        grid_max = std::max(grid_max, mag[j]);
    }
    if (grid_max == 0.0)
        return 0.0;
    // A band-N function sampled at spacing 1/M loses at most a factor
    // 1 - (pi N / M)^2 / 2 between its true maximum and the grid maximum.
    const double ratio = std::numbers::pi * n_ / m;
    const double threshold = grid_max * std::max(0.0, 1.0 - 0.5 * ratio * ratio);
    double best = grid_max;
    const double h = 1.0 / m;
    for (int j = 0; j < m; ++j) {
        const double left = mag[(j + m - 1) % m];
        const double right = mag[(j + 1) % m];
        if (mag[j] < threshold || mag[j] < left || mag[j] < right)
            continue;
        const double x = j * h;
        best = std::max(best, refine_local_max(c_, n_, x - h, x + h, x));
    }
    return best;
}

double FiberFunction::c1_norm() const { return sup_norm() + derivative().sup_norm(); }

bool FiberFunction::is_real(double tol) const
{
    for (int k = 0; k <= n_; ++k)
        if (std::abs(coeff(-k) - std::conj(coeff(k))) > tol)
            return false;
    return true;
}

FiberFunction& FiberFunction::operator+=(const FiberFunction& o)
{
    if (o.n_ > n_)
        *this = resized(o.n_);
    for (int k = -o.n_; k <= o.n_; ++k)
        c_[k + n_] += o.c_[k + o.n_];
    return *this;
}

FiberFunction& FiberFunction::operator-=(const FiberFunction& o)
{
    if (o.n_ > n_)
        *this = resized(o.n_);
    for (int k = -o.n_; k <= o.n_; ++k)
        c_[k + n_] -= o.c_[k + o.n_];
    return *this;
}

FiberFunction& FiberFunction::operator*=(cplx s)
{
    for (auto& v : c_)
        v *= s;
    return *this;
}

cplx pair(const FiberFunction& phi, const FiberFunction& u)
{
    const int m = std::min(phi.truncation(), u.truncation());
    cplx s = 0.0;
    for (int k = -m; k <= m; ++k)
        s += phi.coeff(k) * u.coeff(-k);
    return s;
}

} // namespace fiberspec
