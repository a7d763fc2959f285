#include "fiberspec/serialization.hpp"

#include "fiberspec/errors.hpp"

#include <fstream>
#include <string>

namespace fiberspec {

namespace {

template <class F>
auto guarded(const char* what, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

const Json& require(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

template <class T>
T value_or(const Json& j, const char* key, T fallback)
{
    if (!j.is_object() || !j.contains(key))
        return fallback;
    return j.at(key).get<T>();
}

} // namespace

Json to_json(const CircleMap& map)
{
    Json coeffs = Json::array();
    for (const auto& m : map.modes())
        coeffs.push_back({m.k, m.a, m.b});
    Json j{{"degree", map.degree()}, {"coeffs", coeffs}, {"r", map.r()}};
    if (map.shift() != 0.0)
        j["shift"] = map.shift();
    return j;
}

CircleMap map_from_json(const Json& j)
{
    return guarded("map", [&] {
        std::vector<LiftMode> modes;
        for (const auto& c : value_or(j, "coeffs", Json::array())) {
            if (!c.is_array() || c.size() != 3)
                throw ConfigError("map: each coefficient must be [k, a, b]");
            modes.push_back({c[0].get<int>(), c[1].get<double>(), c[2].get<double>()});
        }
        return CircleMap(require(j, "degree").get<int>(), std::move(modes),
                         value_or(j, "r", 2.0), value_or(j, "shift", 0.0));
    });
}

Json to_json(const BaseSystem& base)
{
    switch (base.variant()) {
    case BaseSystem::Variant::Invertible:
        return {{"variant", "rotation"}, {"alpha", base.alpha()}};
    case BaseSystem::Variant::PiecewiseSmooth:
        if (base.breaks() == std::vector<double>{0.0, 0.5, 1.0} && base.density().empty())
            return {{"variant", "piecewise_doubling"}};
        return {{"variant", "piecewise_affine"},
                {"breaks", base.breaks()},
                {"density", base.density()}};
    case BaseSystem::Variant::OneSidedShift:
        return {{"variant", "shift"}, {"p", base.probabilities()}};
    }
    throw ConfigError("base: unknown variant");
}

BaseSystem base_from_json(const Json& j)
{
    return guarded("base", [&] {
        const auto variant = require(j, "variant").get<std::string>();
        if (variant == "rotation")
            return BaseSystem::rotation(require(j, "alpha").get<double>());
        if (variant == "piecewise_doubling")
            return BaseSystem::piecewise_doubling();
        if (variant == "piecewise_affine")
            return BaseSystem::piecewise_affine(require(j, "breaks").get<std::vector<double>>(),
                                                value_or(j, "density", std::vector<double>{}));
        if (variant == "shift")
            return BaseSystem::shift(require(j, "p").get<std::vector<double>>());
        throw ConfigError("base: unknown variant \"" + variant + "\"");
    });
}

Json to_json(const NoiseKind& kind)
{
    if (std::holds_alternative<AdditiveNoise>(kind))
        return "additive";
    const auto& p = std::get<ParametricNoise>(kind);
    return {{"parametric",
             {{"k", p.k}, {"coefficient", p.coefficient == ParametricNoise::Coefficient::A ? "a" : "b"}}}};
}

NoiseKind noise_kind_from_json(const Json& j)
{
    return guarded("noise_kind", [&]() -> NoiseKind {
        if (j.is_string()) {
            const auto s = j.get<std::string>();
            if (s == "additive")
                return AdditiveNoise{};
            if (s == "parametric")
                return ParametricNoise{};
            throw ConfigError("noise_kind: unknown kind \"" + s + "\"");
        }
        const Json& p = require(j, "parametric");
        ParametricNoise n;
        n.k = value_or(p, "k", 1);
        const auto c = value_or(p, "coefficient", std::string("a"));
        if (c != "a" && c != "b")
            throw ConfigError("noise_kind: coefficient must be \"a\" or \"b\"");
        n.coefficient = c == "a" ? ParametricNoise::Coefficient::A : ParametricNoise::Coefficient::B;
        return n;
    });
}

Json to_json(const NoiseProfile& profile)
{
    if (profile.levels.empty())
        return "cos";
    return {{"levels", profile.levels}};
}

NoiseProfile noise_profile_from_json(const Json& j)
{
    return guarded("s_profile", [&] {
        NoiseProfile p;
        if (j.is_string()) {
            if (j.get<std::string>() != "cos")
                throw ConfigError("s_profile: only \"cos\" or {levels} are supported");
            return p;
        }
        p.levels = require(j, "levels").get<std::vector<double>>();
        return p;
    });
}

Json to_json(const RandomMapFamily& fam)
{
    return {{"f0", to_json(fam.f0())},
            {"noise_kind", to_json(fam.kind())},
            {"s_profile", to_json(fam.profile())},
            {"epsilon", fam.epsilon()}};
}

RandomMapFamily family_from_json(const Json& j)
{
    return guarded("family", [&] {
        return RandomMapFamily(map_from_json(require(j, "f0")),
                               noise_kind_from_json(require(j, "noise_kind")),
                               j.contains("s_profile") ? noise_profile_from_json(j.at("s_profile"))
                                                       : NoiseProfile{},
                               require(j, "epsilon").get<double>());
    });
}

FiberFunction observable_from_json(const Json& j, int truncation)
{
    return guarded("observable", [&] {
        std::vector<TrigTerm> terms;
        for (const auto& t : value_or(j, "terms", Json::array())) {
            if (!t.is_array() || t.size() != 3)
                throw ConfigError("observable: each term must be [k, a, b]");
            const int k = t[0].get<int>();
            if (k < 1 || k > truncation)
                throw ConfigError("observable: mode index outside 1..N");
            terms.push_back({k, t[1].get<double>(), t[2].get<double>()});
        }
        return FiberFunction::trig(truncation, value_or(j, "c0", 0.0), terms);
    });
}

ExperimentConfig config_from_json(const Json& j)
{
    return guarded("config", [&] {
        if (!j.is_object())
            throw ConfigError("config: top level must be an object");
        ExperimentConfig cfg;
        cfg.map = map_from_json(require(j, "map"));
        cfg.base = base_from_json(value_or(j, "base", Json{{"variant", "piecewise_doubling"}}));
        Json noise = value_or(j, "noise", Json{{"kind", "additive"}});
        cfg.noise = noise_kind_from_json(noise.contains("kind") ? noise.at("kind") : Json("additive"));
        if (auto* p = std::get_if<ParametricNoise>(&cfg.noise)) {
            p->k = value_or(noise, "k", p->k);
            const auto c = value_or(noise, "coefficient", std::string("a"));
            if (c != "a" && c != "b")
                throw ConfigError("noise: coefficient must be \"a\" or \"b\"");
            p->coefficient =
                c == "a" ? ParametricNoise::Coefficient::A : ParametricNoise::Coefficient::B;
        }
        cfg.profile = noise.contains("levels")
                          ? NoiseProfile{noise.at("levels").get<std::vector<double>>()}
                          : NoiseProfile::default_for(cfg.base);
        cfg.epsilons = value_or(j, "epsilons", std::vector<double>{0.0});
        cfg.truncation = value_or(j, "N", cfg.truncation);
        cfg.grid = value_or(j, "grid", cfg.grid);
        cfg.depth = value_or(j, "depth", cfg.depth);
        cfg.n_max = value_or(j, "n_max", cfg.n_max);
        cfg.seed = value_or(j, "seed", cfg.seed);
        const Json tol = value_or(j, "tolerances", Json::object());
        cfg.tol.solver = value_or(tol, "solver", cfg.tol.solver);
        cfg.tol.rate_slack = value_or(tol, "rate_slack", cfg.tol.rate_slack);
        cfg.tol.error_ratio = value_or(tol, "error_ratio", cfg.tol.error_ratio);
        cfg.tol.fit_floor = value_or(tol, "fit_floor", cfg.tol.fit_floor);
        cfg.tol.omega_spread = value_or(tol, "omega_spread", cfg.tol.omega_spread);
        if (cfg.truncation < 8)
            throw ConfigError("config: N must be >= 8");
        const Json obs = value_or(j, "observables", Json::object());
        if (obs.contains("phi"))
            cfg.phi = observable_from_json(obs.at("phi"), cfg.truncation);
        if (obs.contains("u"))
            cfg.u = observable_from_json(obs.at("u"), cfg.truncation);
        cfg.set_default_observables();
        cfg.validate();
        return cfg;
    });
}

Json to_json(const ExperimentConfig& cfg)
{
    Json noise{{"kind", std::holds_alternative<AdditiveNoise>(cfg.noise) ? "additive" : "parametric"}};
    if (const auto* p = std::get_if<ParametricNoise>(&cfg.noise)) {
        noise["k"] = p->k;
        noise["coefficient"] = p->coefficient == ParametricNoise::Coefficient::A ? "a" : "b";
    }
    if (!cfg.profile.levels.empty())
        noise["levels"] = cfg.profile.levels;
    return {{"map", to_json(cfg.map)},
            {"base", to_json(cfg.base)},
            {"noise", noise},
            {"epsilons", cfg.epsilons},
            {"N", cfg.truncation},
            {"grid", cfg.grid},
            {"depth", cfg.depth},
            {"n_max", cfg.n_max},
            {"seed", cfg.seed},
            {"tolerances",
             {{"solver", cfg.tol.solver},
              {"rate_slack", cfg.tol.rate_slack},
              {"error_ratio", cfg.tol.error_ratio},
              {"fit_floor", cfg.tol.fit_floor},
              {"omega_spread", cfg.tol.omega_spread}}}};
}

Json to_json(const OperatorMatrix& op)
{
    Json data = Json::array();
    if (op.basis() == Basis::FourierCollocation) {
        const auto& a = op.fourier_matrix();
        for (int i = 0; i < op.n(); ++i)
            for (int k = 0; k < op.n(); ++k)
                data.push_back({a(i, k).real(), a(i, k).imag()});
        return {{"basis", "fourier"}, {"n", op.n()}, {"data", data}};
    }
    const Eigen::MatrixXd p(op.ulam_matrix());
    for (int i = 0; i < op.n(); ++i)
        for (int k = 0; k < op.n(); ++k)
            data.push_back(p(i, k));
    return {{"basis", "ulam"}, {"n", op.n()}, {"data", data}};
}

Json load_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

} // namespace fiberspec
