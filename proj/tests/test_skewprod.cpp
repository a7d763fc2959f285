#include "fiberspec/errors.hpp"
#include "fiberspec/skewprod.hpp"
#include "fiberspec/spectral.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fiberspec;

namespace {

double circle_distance(double a, double b)
{
    double d = std::abs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

double lift_second_derivative(const CircleMap& f, double y)
{
    double v = 0.0;
    for (const auto& md : f.modes()) {
        const double w = oracle::kTwoPi * md.k;
        v -= w * (md.a * std::sin(w * y) + md.b * std::cos(w * y));
    }
    return v;
}

RandomMapFamily parametric(double eps, const BaseSystem& base)
{
    return RandomMapFamily(oracle::perturbed(), ParametricNoise{}, NoiseProfile::default_for(base), eps);
}

RandomMapFamily additive(double eps, const BaseSystem& base)
{
    return RandomMapFamily(oracle::doubling(), AdditiveNoise{}, NoiseProfile::default_for(base), eps);
}

RandomObservable random_observable(Rng& rng, const Representation& rep, int truncation, int band)
{
    std::vector<FiberFunction> fibers;
    for (int i = 0; i < representation_size(rep); ++i)
        fibers.push_back(oracle::random_trig(rng, band).to(truncation));
    return RandomObservable::on(rep, std::move(fibers));
}

double max_c1_diff(const RandomObservable& a, const RandomObservable& b)
{
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (int i = 0; i < a.size(); ++i)
        d = std::max(d, (a.fiber(i) - b.fiber(i)).c1_norm());
    return d;
}

/// Index of theta(w) at depth d-1 for word index i at depth d.
int shifted_index(const Cylinder& c, int i)
{
    return i % Cylinder{c.alphabet, c.depth - 1}.words();
}

} // namespace

TEST_CASE("fiber_map examples")
{
    const BaseSystem rot = BaseSystem::rotation(0.1);
    const auto add = additive(0.1, rot);
    const CircleMap f = add.fiber_map(0.0);
    CHECK(f.degree() == 2);
    CHECK(f.shift() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(f.modes().empty());
    CHECK(f.lift(0.3) == doctest::Approx(0.7).epsilon(1e-15));
    for (double w : {0.0, 0.3, 0.71})
        CHECK(additive(0.0, rot).fiber_map(w) == oracle::doubling());

    const auto par = parametric(0.1, rot);
    const CircleMap g = par.fiber_map(0.25);
    REQUIRE(g.modes().size() == 1);
    CHECK(g.modes()[0].a == 0.5);
    CHECK(par.fiber_map(0.0).modes()[0].a == doctest::Approx(0.6).epsilon(1e-15));

    // parametric on a mode f0 does not carry
    const RandomMapFamily k3(oracle::doubling(), ParametricNoise{3, ParametricNoise::Coefficient::B},
                             NoiseProfile{}, 0.05);
    const CircleMap h = k3.fiber_map(0.5);
    REQUIRE(h.modes().size() == 1);
    CHECK(h.modes()[0].k == 3);
    CHECK(h.modes()[0].a == 0.0);
    CHECK(h.modes()[0].b == doctest::Approx(-0.05).epsilon(1e-15));

    const BaseSystem sh = BaseSystem::shift({0.5, 0.5});
    const auto ps = parametric(0.1, sh);
    CHECK(ps.fiber_map(Word{0, 1}).modes()[0].a == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(ps.fiber_map(Word{1, 0}).modes()[0].a == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("family validation")
{
    const BaseSystem rot = BaseSystem::rotation(0.1);
    CHECK(RandomMapFamily::eps_max(oracle::perturbed(), ParametricNoise{}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::isinf(RandomMapFamily::eps_max(oracle::perturbed(), AdditiveNoise{})));
    CHECK_THROWS_AS(parametric(0.5, rot), ConfigError);
    CHECK_THROWS_AS(parametric(0.7, rot), ConfigError);
    CHECK_THROWS_AS(parametric(-0.1, rot), ConfigError);
    CHECK_NOTHROW(parametric(0.49, rot));
    CHECK_THROWS_AS(parametric(0.1, rot).with_epsilon(0.5), ConfigError);
    CHECK_THROWS_AS(RandomMapFamily(oracle::doubling(), AdditiveNoise{}, NoiseProfile{{0.0, 1.5}}, 0.1),
                    ConfigError);
    CHECK_THROWS_AS(RandomMapFamily(oracle::doubling(), ParametricNoise{0}, NoiseProfile{}, 0.1), ConfigError);
    // expanding for every omega just below eps_max
    const auto edge = parametric(0.499, rot);
    for (int i = 0; i < 64; ++i)
        CHECK(edge.fiber_map(i / 64.0).min_derivative() > 1.0);
}

TEST_CASE("Lipschitz constant bounds the C2 distance")
{
    const BaseSystem rot = BaseSystem::rotation(0.1);
    for (int k : {1, 2, 3}) {
        for (auto coef : {ParametricNoise::Coefficient::A, ParametricNoise::Coefficient::B}) {
            const RandomMapFamily fam(oracle::perturbed(), ParametricNoise{k, coef}, NoiseProfile{}, 0.2);
            double worst = 0.0;
            for (int i = 0; i < 32; ++i) {
                const CircleMap g = fam.fiber_map(i / 32.0);
                double d0 = 0.0, d1 = 0.0, d2 = 0.0;
                for (int j = 0; j < 512; ++j) {
                    const double y = j / 512.0;
                    const CircleMap& f0 = fam.f0();
                    d0 = std::max(d0, std::abs(oracle::iterate_lift(g, 1, y) - oracle::iterate_lift(f0, 1, y)));
                    d1 = std::max(d1, std::abs(oracle::lift_derivative(g, y) - oracle::lift_derivative(f0, y)));
                    d2 = std::max(d2, std::abs(lift_second_derivative(g, y) - lift_second_derivative(f0, y)));
                }
                worst = std::max(worst, d0 + d1 + d2);
            }
            CHECK(worst <= fam.lipschitz() * fam.epsilon() + 1e-12);
            // the bound is attained at omega = 0
            CHECK(worst >= 0.99 * fam.lipschitz() * fam.epsilon());
        }
    }
    const auto add = additive(0.3, rot);
    double worst = 0.0;
    for (int i = 0; i < 32; ++i)
        worst = std::max(worst, std::abs(add.fiber_map(i / 32.0).shift()));
    CHECK(worst <= add.lipschitz() * 0.3 + 1e-15);
}

TEST_CASE("fiber_compose_n")
{
    const BaseSystem rot = BaseSystem::rotation(0.6180339887498949);
    const auto par = parametric(0.2, rot);
    const ComposedMap one = fiber_compose_n(par, rot, 0.3, 1);
    const CircleMap direct = par.fiber_map(0.3);
    for (double x : {0.0, 0.2, 0.9})
        CHECK(one(x) == direct(x));
    const ComposedMap d5 = fiber_compose_n(additive(0.0, rot), rot, 0.3, 5);
    for (double x : {0.01, 0.2, 0.77})
        CHECK(d5.lift(x) == doctest::Approx(32.0 * x).epsilon(1e-14));
    CHECK_THROWS_AS(fiber_compose_n(par, rot, 0.3, 0), ConfigError);

    // orbit order: f(theta omega) o f(omega)
    const ComposedMap two = fiber_compose_n(par, rot, 0.3, 2);
    const CircleMap g0 = par.fiber_map(0.3);
    const CircleMap g1 = par.fiber_map(std::get<double>(rot.apply(0.3)));
    for (double x : {0.05, 0.5, 0.8})
        CHECK(circle_distance(two(x), g1(g0(x))) < 1e-14);
}

TEST_CASE("cocycle law")
{
    Rng rng(77);
    const BaseSystem rot = BaseSystem::rotation(0.6180339887498949);
    const BaseSystem sh = BaseSystem::shift({0.3, 0.7});
    const BaseSystem pw = BaseSystem::piecewise_doubling();
    for (int n = 1; n <= 3; ++n)
        for (int m = 1; m <= 3; ++m) {
            double worst = 0.0;
            for (int t = 0; t < 100; ++t) {
                const double x = rng.uniform();
                for (const BaseSystem* b : {&rot, &pw}) {
                    const auto fam = parametric(0.3, *b);
                    const double w = rng.uniform();
                    BasePoint tw = w;
                    for (int j = 0; j < n; ++j)
                        tw = b->apply(tw);
                    const double lhs = fiber_compose_n(fam, *b, w, n + m)(x);
                    const double rhs = fiber_compose_n(fam, *b, tw, m)(fiber_compose_n(fam, *b, w, n)(x));
                    worst = std::max(worst, circle_distance(lhs, rhs));
                }
                Word word;
                for (int j = 0; j < n + m + 2; ++j)
                    word.push_back(rng.uniform() < 0.3 ? 0 : 1);
                const auto fam = parametric(0.3, sh);
                const Word tail(word.begin() + n, word.end());
                const double lhs = fiber_compose_n(fam, sh, word, n + m)(x);
                const double rhs = fiber_compose_n(fam, sh, tail, m)(fiber_compose_n(fam, sh, word, n)(x));
                worst = std::max(worst, circle_distance(lhs, rhs));
            }
            CHECK(worst < 1e-12);
        }
}

TEST_CASE("skew_apply examples")
{
    const BaseSystem rot = BaseSystem::rotation(0.6180339887498949);
    const OperatorMatrix l0 = assemble_fourier(oracle::perturbed(), 64);
    const FiberFunction rho0 = std::get<FiberFunction>(leading_pair(l0).density);
    const RandomObservable c = skew_apply(parametric(0.0, rot), rot, RandomObservable::constant(rho0));
    CHECK(c.kind() == RandomObservable::Kind::Constant);
    CHECK((c.fiber(0) - rho0).c1_norm() < 1e-12);

    for (const BaseSystem& b : {rot, BaseSystem::piecewise_doubling(), BaseSystem::shift({0.4, 0.6})}) {
        const RandomObservable one = RandomObservable::constant(FiberFunction::constant(64, 1.0));
        const RandomObservable out = skew_apply(additive(0.2, b), b, one);
        CHECK(out.kind() != RandomObservable::Kind::Constant);
        for (const auto& f : out.fibers())
            CHECK((f - FiberFunction::constant(64, 1.0)).c1_norm() < 1e-14);
    }
}

TEST_CASE("SkewOperator caches and deduplicates fiber matrices")
{
    const BaseSystem sh = BaseSystem::shift({0.5, 0.5});
    const SkewOperator op(parametric(0.1, sh), sh, Cylinder{2, 4}, 32);
    CHECK_FALSE(op.uniform());
    CHECK(&op.fiber_operator(0) == &op.fiber_operator(7));
    CHECK(&op.fiber_operator(0) != &op.fiber_operator(8));
    const SkewOperator u(parametric(0.0, sh), sh, Cylinder{2, 4}, 32);
    CHECK(u.uniform());
    CHECK_THROWS_AS(SkewOperator(parametric(0.1, sh), sh, OmegaGrid{16}, 32), ConfigError);
}

TEST_CASE("skew_fixed_density at eps = 0 reproduces the deterministic pair")
{
    const BaseSystem rot = BaseSystem::rotation(0.6180339887498949);
    const LeadingPair lp = leading_pair(assemble_fourier(oracle::perturbed(), 64));
    const FixedDensity fd = skew_fixed_density(parametric(0.0, rot), rot, OmegaGrid{64}, 64);
    CHECK(fd.lambda_bar == std::real(lp.eigenvalue));
    CHECK(fd.iterations == lp.iterations);
    for (const auto& f : fd.rho.fibers())
        CHECK(f == std::get<FiberFunction>(lp.density));
}

TEST_CASE("additive noise on the doubling map keeps Lebesgue")
{
    for (const BaseSystem& b : {BaseSystem::rotation(0.6180339887498949), BaseSystem::piecewise_doubling(),
                                BaseSystem::shift({0.5, 0.5})}) {
        for (double eps : {0.1, 0.7, 3.0}) {
            const auto fam = additive(eps, b);
            const FixedDensity fd = skew_fixed_density(fam, b, b.representation(64, 4), 32);
            CHECK(fd.lambda_bar == 1.0);
            for (const auto& f : fd.rho.fibers())
                CHECK(f == FiberFunction::constant(32, 1.0));
        }
    }
}

TEST_CASE("parametric noise on the shift: depth refinement and K_P")
{
    const BaseSystem sh = BaseSystem::shift({0.5, 0.5});
    const auto fam = parametric(0.05, sh);
    const FixedDensity d6 = skew_fixed_density(fam, sh, Cylinder{2, 6}, 64);
    const FixedDensity d8 = skew_fixed_density(fam, sh, Cylinder{2, 8}, 64);
    CHECK(kp_defect(d6.rho) < 1e-8);
    CHECK(std::abs(d6.lambda_bar - 1.0) < 1e-11);
    double worst = 0.0;
    for (int i = 0; i < d8.rho.size(); ++i)
        worst = std::max(worst, (d8.rho.fiber(i) - d6.rho.fiber(i >> 2)).sup_norm());
    CHECK(worst < 1e-4);
    for (const auto& f : d6.rho.fibers())
        CHECK(std::abs(f.integral() - 1.0) < 1e-12);
    // rho_eps differs from rho_0
    const FiberFunction rho0 = std::get<FiberFunction>(leading_pair(assemble_fourier(oracle::perturbed(), 64)).density);
    CHECK((d6.rho.fiber(0) - rho0).sup_norm() > 1e-4);
}

TEST_CASE("n-fold skew_apply equals the composed-map transfer")
{
    Rng rng(9);
    const int n_grid = 32;
    const BaseSystem rot = BaseSystem::rotation(5.0 / n_grid);
    const BaseSystem sh = BaseSystem::shift({0.35, 0.65});
    struct Setup {
        const BaseSystem* base;
        Representation rep;
    };
    for (const Setup& s : {Setup{&rot, OmegaGrid{n_grid}}, Setup{&sh, Cylinder{2, 4}}}) {
        const auto fam = parametric(0.2, *s.base);
        const SkewOperator op(fam, *s.base, s.rep, 64);
        const RandomObservable u = random_observable(rng, s.rep, 64, 4);
        RandomObservable iter = u;
        for (int n = 1; n <= 3; ++n) {
            iter = op.apply(iter);
            std::vector<FiberFunction> fibers;
            for (int i = 0; i < u.size(); ++i) {
                const ComposedMap fn = fiber_compose_n(fam, *s.base, s.base->point(s.rep, i), n);
                fibers.push_back(assemble_fourier(fn, 64).apply(u.fiber(i)));
            }
            RandomObservable direct = RandomObservable::on(s.rep, fibers);
            for (int j = 0; j < n; ++j)
                direct = base_lift_transfer(*s.base, direct);
            if (const auto* c = std::get_if<Cylinder>(&s.rep))
                direct = direct.padded(c->depth);
            CHECK(max_c1_diff(iter, direct) < 1e-8);
        }
    }
}

TEST_CASE("global duality")
{
    Rng rng(12);
    const BaseSystem rot = BaseSystem::rotation(7.0 / 64);
    const BaseSystem sh = BaseSystem::shift({0.25, 0.75});
    struct Setup {
        const BaseSystem* base;
        Representation rep;
    };
    for (const Setup& s : {Setup{&rot, OmegaGrid{64}}, Setup{&sh, Cylinder{2, 5}}}) {
        const auto fam = parametric(0.3, *s.base);
        const SkewOperator op(fam, *s.base, s.rep, 64);
        const auto weights = s.base->weights(s.rep);
        const RandomObservable u = random_observable(rng, s.rep, 64, 3);
        // phi as trig data per point of the representation of theta(omega)
        std::vector<oracle::RandomTrig> phi;
        for (int i = 0; i < u.size(); ++i)
            phi.push_back(oracle::random_trig(rng, 3));
        auto phi_index = [&](int i) {
            if (const auto* c = std::get_if<Cylinder>(&s.rep))
                return shifted_index(*c, i);
            return s.base->nearest(s.rep, s.base->apply(s.base->point(s.rep, i)));
        };
        // phi on the output representation. For the shift, phi lives at depth
        // d-1 and is padded by appending a symbol, so word i reads phi[i / K].
        std::vector<FiberFunction> phi_out;
        for (int i = 0; i < u.size(); ++i) {
            const auto* c = std::get_if<Cylinder>(&s.rep);
            phi_out.push_back(phi[c ? i / c->alphabet : i].to(64));
        }
        const RandomObservable lu = op.apply(u);
        cplx lhs = 0.0;
        for (int i = 0; i < u.size(); ++i)
            lhs += weights[i] * pair(phi_out[i], lu.fiber(i));
        double rhs = 0.0;
        for (int i = 0; i < u.size(); ++i) {
            const CircleMap f = fam.fiber_map(s.base->point(s.rep, i));
            const auto& p = phi[phi_index(i)];
            rhs += weights[i] * oracle::integrate(
                                    [&](double x) { return p(oracle::iterate_lift(f, 1, x)) * u.fiber(i)(x).real(); },
                                    4096);
        }
        CHECK(std::abs(lhs - rhs) < 1e-7);
    }
}

TEST_CASE("K_P preserved over 100 iterations")
{
    Rng rng(13);
    const BaseSystem rot = BaseSystem::rotation(0.6180339887498949);
    const BaseSystem sh = BaseSystem::shift({0.5, 0.5});
    for (const auto& [base, rep] : {std::pair{&rot, Representation{OmegaGrid{64}}},
                                   std::pair{&sh, Representation{Cylinder{2, 5}}}}) {
        const SkewOperator op(parametric(0.2, *base), *base, rep, 32);
        RandomObservable u = random_observable(rng, rep, 32, 3);
        for (auto& f : u.fibers())
            f.coeff(0) = 0.3;
        REQUIRE(kp_defect(u) < 1e-15);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            u = op.apply(u);
            worst = std::max(worst, kp_defect(u));
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("rho_eps approaches rho_0 along eps halvings")
{
    const BaseSystem rot = BaseSystem::rotation(0.6180339887498949);
    const FiberFunction rho0 = std::get<FiberFunction>(leading_pair(assemble_fourier(oracle::perturbed(), 64)).density);
    double prev = 1e300;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        const FixedDensity fd = skew_fixed_density(parametric(eps, rot), rot, OmegaGrid{64}, 64);
        for (const auto& f : fd.rho.fibers())
            CHECK(std::abs(f.integral() - 1.0) < 1e-12);
        double d = 0.0;
        for (const auto& f : fd.rho.fibers())
            d = std::max(d, (f - rho0).c1_norm());
        CHECK(d < prev);
        prev = d;
    }
}
