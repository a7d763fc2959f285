#include "fiberspec/base.hpp"

#include "fiberspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fiberspec {

namespace {

double wrap(double x)
{
    double y = x - std::floor(x);
    return y >= 1.0 ? 0.0 : y;
}

int ipow(int base, int exp)
{
    long long v = 1;
    for (int i = 0; i < exp; ++i) {
        v *= base;
        if (v > (1LL << 26))
            throw ConfigError("cylinder representation too large");
    }
    return static_cast<int>(v);
}

/// Periodic linear interpolation weights at omega on a grid of size g.
void interpolation(int g, double omega, std::vector<std::pair<int, double>>& row, double scale)
{
    const double t = wrap(omega) * g;
    double fl = std::floor(t);
    const double frac = t - fl;
    const int i0 = static_cast<int>(fl) % g;
    const int i1 = (i0 + 1) % g;
    if (1.0 - frac != 0.0)
        row.emplace_back(i0, scale * (1.0 - frac));
    if (frac != 0.0)
        row.emplace_back(i1, scale * frac);
}

double interpolate(std::span<const double> values, double omega)
{
    const int g = static_cast<int>(values.size());
    std::vector<std::pair<int, double>> row;
    interpolation(g, omega, row, 1.0);
    double v = 0.0;
    for (auto [j, w] : row)
        v += w * values[j];
    return v;
}

std::vector<cplx> apply_stencil(const TransferStencil& s, std::span<const cplx> in)
{
    std::vector<cplx> out(s.rows.size(), 0.0);
    for (std::size_t i = 0; i < s.rows.size(); ++i)
        for (auto [j, w] : s.rows[i])
            out[i] += w * in[j];
    return out;
}

} // namespace

int Cylinder::words() const { return ipow(alphabet, depth); }

int representation_size(const Representation& rep)
{
    if (const auto* g = std::get_if<OmegaGrid>(&rep))
        return g->size;
    return std::get<Cylinder>(rep).words();
}

BaseSystem BaseSystem::rotation(double alpha)
{
    if (!std::isfinite(alpha))
        throw ConfigError("rotation: alpha must be finite");
    BaseSystem b;
    b.variant_ = Variant::Invertible;
    b.alpha_ = wrap(alpha);
    return b;
}

BaseSystem BaseSystem::piecewise_doubling() { return piecewise_affine({0.0, 0.5, 1.0}); }

BaseSystem BaseSystem::piecewise_affine(std::vector<double> breaks, std::vector<double> density)
{
    if (breaks.size() < 3 || breaks.front() != 0.0 || breaks.back() != 1.0)
        throw ConfigError("piecewise base: breaks must run from 0 to 1 with >= 2 branches");
    for (std::size_t j = 1; j < breaks.size(); ++j)
        if (!(breaks[j] > breaks[j - 1]))
            throw ConfigError("piecewise base: breaks must be strictly increasing");
    BaseSystem b;
    b.variant_ = Variant::PiecewiseSmooth;
    b.breaks_ = std::move(breaks);
    if (!density.empty()) {
        if (density.size() < 2)
            throw ConfigError("piecewise base: density grid too small");
        const double mn = *std::min_element(density.begin(), density.end());
        if (!(mn > 1e-6))
            throw ConfigError("piecewise base: density must exceed 1e-6 everywhere");
        const double mean = std::accumulate(density.begin(), density.end(), 0.0) / density.size();
        for (double& v : density)
            v /= mean;
        b.density_ = std::move(density);
        // l_{theta,V} p = p on the density grid
        const int g = static_cast<int>(b.density_.size());
        for (int i = 0; i < g; ++i) {
            const double omega = static_cast<double>(i) / g;
            double lp = 0.0;
            for (std::size_t j = 0; j + 1 < b.breaks_.size(); ++j) {
                const double len = b.breaks_[j + 1] - b.breaks_[j];
                lp += len * b.p_at(b.breaks_[j] + len * omega);
            }
            if (std::abs(lp - b.density_[i]) > 1e-6)
                throw ConfigError("piecewise base: density is not invariant");
        }
    }
    return b;
}

BaseSystem BaseSystem::shift(std::vector<double> probabilities)
{
    if (probabilities.size() < 2)
        throw ConfigError("shift base: need at least two symbols");
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p > 0.0))
            throw ConfigError("shift base: probabilities must be positive");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ConfigError("shift base: probabilities must sum to 1");
    BaseSystem b;
    b.variant_ = Variant::OneSidedShift;
    b.probs_ = std::move(probabilities);
    return b;
}

double BaseSystem::p_at(double omega) const
{
    if (variant_ != Variant::PiecewiseSmooth || density_.empty())
        return 1.0;
    return interpolate(density_, omega);
}

BasePoint BaseSystem::apply(const BasePoint& omega) const
{
    if (variant_ == Variant::OneSidedShift) {
        const auto* w = std::get_if<Word>(&omega);
        if (!w)
            throw ConfigError("shift base: base point must be a symbol word");
        if (w->empty())
            throw ConfigError("shift base: cannot shift an empty word");
        return Word(w->begin() + 1, w->end());
    }
    const auto* x = std::get_if<double>(&omega);
    if (!x)
        throw ConfigError("interval base: base point must be a number");
    if (variant_ == Variant::Invertible)
        return wrap(*x + alpha_);
    const double w = wrap(*x);
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), w);
    const std::size_t j = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return wrap((w - breaks_[j]) / (breaks_[j + 1] - breaks_[j]));
}

Representation BaseSystem::representation(int grid, int depth) const
{
    if (variant_ == Variant::OneSidedShift)
        return Cylinder{alphabet(), depth};
    return OmegaGrid{grid};
}

void BaseSystem::check(const Representation& rep) const
{
    if (variant_ == Variant::OneSidedShift) {
        const auto* c = std::get_if<Cylinder>(&rep);
        if (!c || c->alphabet != alphabet() || c->depth < 0)
            throw ConfigError("shift base requires a cylinder representation over its alphabet");
        return;
    }
    const auto* g = std::get_if<OmegaGrid>(&rep);
    if (!g || g->size < 2)
        throw ConfigError("interval base requires an omega-grid representation");
}

TransferStencil BaseSystem::stencil(const Representation& input) const
{
    check(input);
    TransferStencil s;
    s.input = input;
    if (variant_ == Variant::OneSidedShift) {
        const auto c = std::get<Cylinder>(input);
        if (c.depth < 1)
            throw ConfigError("shift transfer: depth-0 cylinder input");
        const Cylinder out{c.alphabet, c.depth - 1};
        const int stride = out.words();
        s.output = out;
        s.rows.resize(stride);
        // (l u)(omega) = sum_a p_a u(a omega)
        for (int v = 0; v < stride; ++v)
            for (int a = 0; a < c.alphabet; ++a)
                s.rows[v].emplace_back(a * stride + v, probs_[a]);
        return s;
    }
    const int g = std::get<OmegaGrid>(input).size;
    s.output = input;
    s.rows.resize(g);
    for (int i = 0; i < g; ++i) {
        const double omega = static_cast<double>(i) / g;
        if (variant_ == Variant::Invertible) {
            interpolation(g, omega - alpha_, s.rows[i], 1.0);
            continue;
        }
        // [sum_j (1_{Gamma_j} u p / |theta_j'|) o theta_j^{-1}] / p
        const double p_here = p_at(omega);
        for (std::size_t j = 0; j + 1 < breaks_.size(); ++j) {
            const double len = breaks_[j + 1] - breaks_[j];
            const double pre = breaks_[j] + len * omega;
            std::vector<std::pair<int, double>> row;
            interpolation(g, pre, row, len / p_here);
            for (auto [idx, w] : row)
                s.rows[i].emplace_back(idx, w * p_at(static_cast<double>(idx) / g));
        }
    }
    return s;
}

std::vector<double> BaseSystem::weights(const Representation& rep) const
{
    check(rep);
    const int n = representation_size(rep);
    std::vector<double> w(n);
    if (variant_ == Variant::OneSidedShift) {
        const auto c = std::get<Cylinder>(rep);
        for (int i = 0; i < n; ++i) {
            double p = 1.0;
            int idx = i;
            for (int d = 0; d < c.depth; ++d) {
                p *= probs_[idx % c.alphabet];
                idx /= c.alphabet;
            }
            w[i] = p;
        }
        return w;
    }
    for (int i = 0; i < n; ++i)
        w[i] = p_at(static_cast<double>(i) / n);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w)
        v /= total;
    return w;
}

BasePoint BaseSystem::point(const Representation& rep, int i) const
{
    check(rep);
    if (const auto* g = std::get_if<OmegaGrid>(&rep))
        return static_cast<double>(i) / g->size;
    const auto c = std::get<Cylinder>(rep);
    Word w(c.depth);
    for (int d = c.depth - 1; d >= 0; --d) {
        w[d] = i % c.alphabet;
        i /= c.alphabet;
    }
    return w;
}

int BaseSystem::nearest(const Representation& rep, const BasePoint& omega) const
{
    check(rep);
    if (const auto* g = std::get_if<OmegaGrid>(&rep)) {
        const auto* x = std::get_if<double>(&omega);
        if (!x)
            throw ConfigError("interval base: base point must be a number");
        return static_cast<int>(std::lround(wrap(*x) * g->size)) % g->size;
    }
    const auto c = std::get<Cylinder>(rep);
    const auto* w = std::get_if<Word>(&omega);
    if (!w || static_cast<int>(w->size()) < c.depth)
        throw ConfigError("shift base: word shorter than cylinder depth");
    int idx = 0;
    for (int d = 0; d < c.depth; ++d) {
        const int s = (*w)[d];
        if (s < 0 || s >= c.alphabet)
            throw ConfigError("shift base: symbol out of range");
        idx = idx * c.alphabet + s;
    }
    return idx;
}

ScalarField BaseSystem::pullback(const ScalarField& phi, const Representation& output) const
{
    check(output);
    ScalarField out{output, std::vector<cplx>(representation_size(output), 0.0)};
    if (variant_ == Variant::OneSidedShift) {
        const auto c = std::get<Cylinder>(output);
        if (c.depth < 1 || !(phi.rep == Representation{Cylinder{c.alphabet, c.depth - 1}}))
            throw ConfigError("shift pullback: phi must have depth one less than the output");
        const int stride = Cylinder{c.alphabet, c.depth - 1}.words();
        for (int w = 0; w < c.words(); ++w)
            out.values[w] = phi.values[w % stride];
        return out;
    }
    check(phi.rep);
    const int gin = representation_size(phi.rep);
    const int gout = representation_size(output);
    for (int i = 0; i < gout; ++i) {
        const double image = std::get<double>(apply(static_cast<double>(i) / gout));
        std::vector<std::pair<int, double>> row;
        interpolation(gin, image, row, 1.0);
        for (auto [j, w] : row)
            out.values[i] += w * phi.values[j];
    }
    return out;
}

RandomObservable RandomObservable::constant(FiberFunction u)
{
    RandomObservable r;
    r.fibers_.push_back(std::move(u));
    return r;
}

RandomObservable RandomObservable::on(const Representation& rep, std::vector<FiberFunction> fibers)
{
    if (static_cast<int>(fibers.size()) != representation_size(rep))
        throw ConfigError("RandomObservable: fiber count does not match representation");
    if (fibers.empty())
        throw ConfigError("RandomObservable: empty representation");
    const int n = fibers.front().truncation();
    for (const auto& f : fibers)
        if (f.truncation() != n)
            throw ConfigError("RandomObservable: mixed Fourier truncations");
    RandomObservable r;
    r.rep_ = rep;
    r.fibers_ = std::move(fibers);
    return r;
}

RandomObservable::Kind RandomObservable::kind() const noexcept
{
    if (!rep_)
        return Kind::Constant;
    return std::holds_alternative<OmegaGrid>(*rep_) ? Kind::OmegaGrid : Kind::Cylinder;
}

RandomObservable RandomObservable::promoted(const Representation& rep) const
{
    if (!rep_)
        return on(rep, std::vector<FiberFunction>(representation_size(rep), fibers_.front()));
    if (*rep_ == rep)
        return *this;
    if (const auto* c = std::get_if<Cylinder>(&rep); c && kind() == Kind::Cylinder) {
        const auto mine = std::get<Cylinder>(*rep_);
        if (mine.alphabet == c->alphabet && mine.depth < c->depth)
            return padded(c->depth);
    }
    throw ConfigError("RandomObservable: representation mismatch");
}

RandomObservable RandomObservable::padded(int target_depth) const
{
    if (kind() != Kind::Cylinder)
        throw ConfigError("RandomObservable::padded: not a cylinder observable");
    const auto c = std::get<Cylinder>(*rep_);
    if (target_depth < c.depth)
        throw ConfigError("RandomObservable::padded: cannot reduce depth");
    const int factor = ipow(c.alphabet, target_depth - c.depth);
    std::vector<FiberFunction> out;
    out.reserve(static_cast<std::size_t>(fibers_.size()) * factor);
    for (const auto& f : fibers_)
        for (int t = 0; t < factor; ++t)
            out.push_back(f);
    return on(Cylinder{c.alphabet, target_depth}, std::move(out));
}

double RandomObservable::linf_norm() const
{
    double m = 0.0;
    for (const auto& f : fibers_)
        m = std::max(m, f.c1_norm());
    return m;
}

std::vector<cplx> RandomObservable::fiber_integrals() const
{
    std::vector<cplx> v;
    v.reserve(fibers_.size());
    for (const auto& f : fibers_)
        v.push_back(f.integral());
    return v;
}

ScalarField RandomObservable::coefficient_field(int k) const
{
    if (!rep_)
        throw ConfigError("coefficient_field: constant observable has no representation");
    ScalarField s{*rep_, {}};
    for (const auto& f : fibers_)
        s.values.push_back(f.coeff(k));
    return s;
}

ScalarField RandomObservable::values_at(double x) const
{
    if (!rep_)
        throw ConfigError("values_at: constant observable has no representation");
    ScalarField s{*rep_, {}};
    for (const auto& f : fibers_)
        s.values.push_back(f(x));
    return s;
}

const FiberFunction& RandomObservable::at(const BaseSystem& base, const BasePoint& omega) const
{
    if (!rep_)
        return fibers_.front();
    return fibers_.at(base.nearest(*rep_, omega));
}

ScalarField base_transfer(const BaseSystem& base, const ScalarField& u)
{
    const TransferStencil s = base.stencil(u.rep);
    return {s.output, apply_stencil(s, u.values)};
}

RandomObservable base_lift_transfer(const BaseSystem& base, const RandomObservable& u)
{
    if (u.kind() == RandomObservable::Kind::Constant) {
        // l_theta 1 = 1
        return u;
    }
    const TransferStencil s = base.stencil(*u.representation());
    const int n = u.truncation();
    std::vector<FiberFunction> out(s.rows.size(), FiberFunction(n));
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        auto dst = out[i].coeffs();
        for (auto [j, w] : s.rows[i]) {
            auto src = u.fiber(j).coeffs();
            for (std::size_t k = 0; k < dst.size(); ++k)
                dst[k] += w * src[k];
        }
    }
    return RandomObservable::on(s.output, std::move(out));
}

double kp_defect(const RandomObservable& u)
{
    const auto ints = u.fiber_integrals();
    cplx mean = 0.0;
    for (const auto& v : ints)
        mean += v;
    mean /= static_cast<double>(ints.size());
    double d = 0.0;
    for (const auto& v : ints)
        d = std::max(d, std::abs(v - mean));
    return d;
}

cplx p_inner(const BaseSystem& base, const ScalarField& a, const ScalarField& b)
{
    if (!(a.rep == b.rep))
        throw ConfigError("p_inner: representation mismatch");
    const auto w = base.weights(a.rep);
    cplx s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * a.values[i] * b.values[i];
    return s;
}

} // namespace fiberspec
