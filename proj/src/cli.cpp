#include "fiberspec/cli.hpp"

#include "fiberspec/correlations.hpp"
#include "fiberspec/errors.hpp"
#include "fiberspec/experiments.hpp"
#include "fiberspec/rng.hpp"
#include "fiberspec/serialization.hpp"
#include "fiberspec/skewprod.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace fiberspec {

namespace {

constexpr int kDensitySamples = 512;

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> omega;
    std::optional<int> samples;
    std::optional<int> nmax;
};

std::uint64_t parse_seed(const std::string& s)
{
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos, 0);
        if (pos != s.size())
            throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid seed \"" + s + "\"");
    }
}

/// --seed beats FIBERSPEC_SEED, which beats the config file.
ExperimentConfig load_config(const Options& opt, Json* raw = nullptr)
{
    Json j = load_json_file(opt.config);
    ExperimentConfig cfg = config_from_json(j);
    if (const char* env = std::getenv("FIBERSPEC_SEED"); env && *env)
        cfg.seed = parse_seed(env);
    if (opt.seed)
        cfg.seed = *opt.seed;
    if (raw)
        *raw = std::move(j);
    return cfg;
}

std::filesystem::path out_dir(const Options& opt)
{
    std::filesystem::path dir(opt.out);
    std::filesystem::create_directories(dir);
    return dir;
}

int cmd_spectrum(const Options& opt, std::ostream& out)
{
    const ExperimentConfig cfg = load_config(opt);
    const Baseline b = run_deterministic_baseline(cfg.map, cfg.truncation, cfg.n_max, cfg.phi, cfg.u,
                                                  cfg.tol.solver, cfg.tol.fit_floor);
    std::ostringstream csv;
    csv << "x,value\n";
    double lowest = b.rho0(0.0).real();
    for (int i = 0; i < kDensitySamples; ++i) {
        const double x = static_cast<double>(i) / kDensitySamples;
        const double v = b.rho0(x).real();
        lowest = std::min(lowest, v);
        csv << format_double(x) << ',' << format_double(v) << '\n';
    }
    write_atomic(out_dir(opt) / "density.csv", csv.str());
    Json j{{"rho0_norm", b.rho0.c1_norm()},
           {"rho0_min", lowest},
           {"tau0", b.tau0},
           {"lambda_r", b.lambda_r},
           {"subdominant", b.subdominant},
           {"bound", std::max(b.tau0, b.lambda_r)}};
    out << j.dump() << '\n';
    return kExitPass;
}

int cmd_stability(const Options& opt, std::ostream& out)
{
    const ExperimentConfig cfg = load_config(opt);
    const StabilityReport report = run_stability_sweep(cfg);
    const auto dir = out_dir(opt);
    write_atomic(dir / "stability.csv", stability_csv(report));
    write_atomic(dir / "stability.json", stability_json(report));
    out << report.status() << '\n';
    for (const auto& f : report.failures)
        out << "  violated: " << f << '\n';
    return report.passed() ? kExitPass : kExitAcceptance;
}

BasePoint parse_omega(const BaseSystem& base, const std::string& s)
{
    if (base.variant() != BaseSystem::Variant::OneSidedShift) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos == s.size())
                return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("--omega must be a number for interval bases");
    }
    Word w;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            w.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError("--omega must be a comma-separated symbol word for the shift base");
        }
    }
    return w;
}

int cmd_corr(const Options& opt, std::ostream& out)
{
    Json raw;
    const ExperimentConfig cfg = load_config(opt, &raw);
    const double eps = raw.contains("epsilon") ? raw.at("epsilon").get<double>() : cfg.epsilons.front();
    const int n_max = opt.nmax.value_or(cfg.n_max);
    if (n_max < 4)
        throw ConfigError("--nmax must be >= 4");

    const RandomMapFamily fam(cfg.map, cfg.noise, cfg.profile, eps);
    const Representation rep = cfg.representation();
    const SkewOperator op(fam, cfg.base, rep, cfg.truncation);
    const FixedDensity fixed = skew_fixed_density(op, cfg.tol.solver);

    std::vector<int> indices;
    if (opt.omega) {
        indices.push_back(cfg.base.nearest(rep, parse_omega(cfg.base, *opt.omega)));
    } else if (opt.samples) {
        if (*opt.samples < 1)
            throw ConfigError("--samples must be >= 1");
        Rng rng(derive_stream(cfg.seed, 0));
        const auto size = static_cast<std::uint64_t>(representation_size(rep));
        for (int s = 0; s < *opt.samples; ++s)
            indices.push_back(static_cast<int>(rng.below(size)));
    } else {
        indices.push_back(0);
    }
    const auto seqs = backward_corr_at(op, fixed.rho, cfg.phi, cfg.u, indices, n_max);
    std::vector<double> seq(n_max, 0.0);
    for (const auto& s : seqs)
        for (int n = 0; n < n_max; ++n)
            seq[n] += s[n] / static_cast<double>(seqs.size());

    const DecayFit fit = fit_decay_rate(seq, cfg.tol.fit_floor);
    std::ostringstream csv;
    csv << "n,value,envelope\n";
    double power = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        power *= fit.tau;
        csv << n << ',' << format_double(seq[n - 1]) << ',' << format_double(fit.envelope_C * power)
            << '\n';
    }
    const auto dir = out_dir(opt);
    write_atomic(dir / "corr.csv", csv.str());
    Json j{{"epsilon", eps},
           {"tau", fit.tau},
           {"C", fit.C},
           {"envelope_C", fit.envelope_C},
           {"max_ratio", fit.max_ratio},
           {"flagged", fit.flagged},
           {"omega_points", indices.size()}};
    write_atomic(dir / "corr.json", j.dump(2) + "\n");
    out << j.dump() << '\n';
    return kExitPass;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Transfer-operator experiments for random expanding circle maps"};
    app.require_subcommand(1);
    Options opt;
    std::string seed_text;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opt.config, "JSON configuration file")->required();
        sub->add_option("--out", opt.out, "Output directory (default: current directory)");
        sub->add_option("--seed", seed_text, "RNG seed (overrides FIBERSPEC_SEED and the config)");
    };
    auto* spectrum = app.add_subcommand("spectrum", "Deterministic baseline: rho0, tau0, Lambda_r");
    add_common(spectrum);
    auto* stability = app.add_subcommand("stability", "Epsilon sweep with stability and rate checks");
    add_common(stability);
    auto* corr = app.add_subcommand("corr", "Backward fiber correlation sequence and fitted rate");
    add_common(corr);
    auto* omega_opt = corr->add_option("--omega", opt.omega,
                                       "Base point: a number, or a comma-separated word for the shift");
    auto* samples_opt =
        corr->add_option("--samples", opt.samples, "Average over N seeded random base points");
    omega_opt->excludes(samples_opt);
    corr->add_option("--nmax", opt.nmax, "Number of correlation terms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitConfig;
    }

    try {
        if (!seed_text.empty())
            opt.seed = parse_seed(seed_text);
        if (spectrum->parsed())
            return cmd_spectrum(opt, out);
        if (stability->parsed())
            return cmd_stability(opt, out);
        return cmd_corr(opt, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

} // namespace fiberspec
