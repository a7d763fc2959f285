#include "fiberspec/experiments.hpp"

#include "fiberspec/correlations.hpp"
#include "fiberspec/errors.hpp"
#include "fiberspec/spectral.hpp"
#include "fiberspec/transfer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fiberspec {

namespace {

// Errors at or below this count as exactly zero in the monotonicity check.
constexpr double kExactError = 1e-10;
constexpr double kLambdaBarTolerance = 1e-6;
constexpr double kKpTolerance = 1e-8;
constexpr int kExpandingSteps = 8;

std::string eps_tag(double eps) { return "epsilon=" + format_double(eps); }

} // namespace

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ExperimentConfig::set_default_observables()
{
    const TrigTerm one[] = {{1, 1.0, 0.0}};
    const TrigTerm two[] = {{2, 1.0, 0.0}};
    if (phi.coeffs().empty())
        phi = FiberFunction::trig(truncation, 0.0, one);
    if (u.coeffs().empty())
        u = FiberFunction::trig(truncation, 0.0, two);
}

void ExperimentConfig::validate() const
{
    if (truncation < 8)
        throw ConfigError("config: Fourier truncation N must be >= 8");
    if (n_max < 4)
        throw ConfigError("config: n_max must be >= 4");
    base.check(representation());
    if (base.variant() == BaseSystem::Variant::OneSidedShift && depth < 1)
        throw ConfigError("config: cylinder depth must be >= 1");
    if (epsilons.empty())
        throw ConfigError("config: epsilon list is empty");
    for (std::size_t i = 0; i + 1 < epsilons.size(); ++i)
        if (!(epsilons[i + 1] < epsilons[i]))
            throw ConfigError("config: epsilon list must be strictly decreasing");
    const double emax = RandomMapFamily::eps_max(map, noise);
    for (double e : epsilons)
        if (!(e >= 0.0) || !(e < emax))
            throw ConfigError("config: epsilon " + format_double(e) + " outside [0, eps_max = " +
                              format_double(emax) + ")");
    if (base.variant() == BaseSystem::Variant::OneSidedShift &&
        static_cast<int>(profile.levels.size()) != base.alphabet())
        throw ConfigError("config: noise levels must have one entry per shift symbol");
    if (!(tol.solver > 0.0) || !(tol.rate_slack >= 0.0) || !(tol.fit_floor >= 0.0))
        throw ConfigError("config: tolerances must be positive");
}

Baseline run_deterministic_baseline(const CircleMap& map, int truncation, int n_max,
                                    const FiberFunction& phi, const FiberFunction& u,
                                    double solver_tol, double fit_floor)
{
    const OperatorMatrix op = assemble_fourier(map, truncation);
    Baseline b;
    b.rho0 = std::get<FiberFunction>(leading_pair(op, solver_tol).density);
    b.correlations = deterministic_corr(op, b.rho0, phi, u, n_max);
    b.tau0 = fit_decay_rate(b.correlations, fit_floor).tau;
    b.lambda_r = expanding_constant(map, map.r(), kExpandingSteps).value;
    b.subdominant = subdominant_radius(op);
    return b;
}

Baseline run_deterministic_baseline(const CircleMap& map, int truncation, int n_max)
{
    ExperimentConfig cfg;
    cfg.truncation = truncation;
    cfg.set_default_observables();
    return run_deterministic_baseline(map, truncation, n_max, cfg.phi, cfg.u);
}

std::vector<int> stratified_indices(int size, int count)
{
    std::vector<int> idx(count);
    for (int j = 0; j < count; ++j)
        idx[j] = std::min(size - 1, static_cast<int>((j + 0.5) * size / count));
    return idx;
}

StabilityReport run_stability_sweep(const ExperimentConfig& input)
{
    ExperimentConfig cfg = input;
    cfg.set_default_observables();
    cfg.validate();

    StabilityReport report;
    report.seed = cfg.seed;
    report.rate_slack = cfg.tol.rate_slack;
    const Baseline base0 = run_deterministic_baseline(cfg.map, cfg.truncation, cfg.n_max, cfg.phi,
                                                      cfg.u, cfg.tol.solver, cfg.tol.fit_floor);
    report.tau0 = base0.tau0;
    report.lambda_r = base0.lambda_r;
    report.bound = std::max(base0.tau0, base0.lambda_r);
    report.subdominant = base0.subdominant;

    const Representation rep = cfg.representation();
    const std::vector<int> samples = stratified_indices(representation_size(rep));

    for (double eps : cfg.epsilons) {
        StabilityRow row;
        row.epsilon = eps;
        try {
            const RandomMapFamily fam(cfg.map, cfg.noise, cfg.profile, eps);
            const SkewOperator op(fam, cfg.base, rep, cfg.truncation);
            FixedDensity fixed = skew_fixed_density(op, cfg.tol.solver);
            row.lambda_bar = fixed.lambda_bar;
            row.iterations = fixed.iterations;
            row.kp_defect = kp_defect(fixed.rho);
            for (const auto& f : fixed.rho.fibers())
                row.density_error = std::max(row.density_error, (f - base0.rho0).c1_norm());

            const auto seqs = backward_corr_at(op, fixed.rho, cfg.phi, cfg.u, samples, cfg.n_max);
            double lo = 0.0, hi = 0.0, sum = 0.0;
            int used = 0;
            for (std::size_t j = 0; j < seqs.size(); ++j) {
                const double tau = fit_decay_rate(seqs[j], cfg.tol.fit_floor).tau;
                lo = j == 0 ? tau : std::min(lo, tau);
                hi = j == 0 ? tau : std::max(hi, tau);
                if (j % 2 == 0) {
                    sum += tau;
                    ++used;
                }
            }
            row.tau_eps = sum / used;
            row.tau_spread = hi - lo;
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " (" + eps_tag(eps) + ")", e.residual());
        }
        report.rows.push_back(row);
    }

    auto& fail = report.failures;
    const double emax = RandomMapFamily::eps_max(cfg.map, cfg.noise);
    for (const auto& r : report.rows) {
        if (!(std::abs(r.lambda_bar - 1.0) <= kLambdaBarTolerance))
            fail.push_back("lambda_bar not within 1e-6 of 1 at " + eps_tag(r.epsilon));
        if (!(r.kp_defect < kKpTolerance))
            fail.push_back("kp_defect >= 1e-8 at " + eps_tag(r.epsilon));
        if (!std::isfinite(r.density_error) || r.density_error < 0.0)
            fail.push_back("density_error not finite at " + eps_tag(r.epsilon));
        if (!(r.tau_eps <= report.bound + cfg.tol.rate_slack))
            fail.push_back("tau_eps exceeds bound + slack at " + eps_tag(r.epsilon));
        if (!(r.tau_spread < cfg.tol.omega_spread))
            fail.push_back("omega spread of fitted rate >= " + format_double(cfg.tol.omega_spread) +
                           " at " + eps_tag(r.epsilon));
    }
    for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
        const double a = report.rows[i].density_error;
        const double b = report.rows[i + 1].density_error;
        if (std::max(a, b) > kExactError && !(b < a))
            fail.push_back("density_error not strictly decreasing at " +
                           eps_tag(report.rows[i + 1].epsilon));
    }
    if (report.rows.size() >= 2) {
        const double first = report.rows.front().density_error;
        const double last = report.rows.back().density_error;
        if (first <= kExactError) {
            report.flags.push_back("error ratio not evaluated: density_error is exactly zero");
        } else if (report.rows.front().epsilon > 0.5 * emax) {
            report.flags.push_back("error ratio not asserted: first epsilon exceeds eps_max / 2 (ratio " +
                                   format_double(last / first) + ")");
        } else if (!(last / first <= cfg.tol.error_ratio)) {
            fail.push_back("final/initial density_error ratio " + format_double(last / first) +
                           " exceeds " + format_double(cfg.tol.error_ratio));
        }
    }
    return report;
}

std::string stability_csv(const StabilityReport& report)
{
    std::ostringstream out;
    out << "epsilon,density_error_max_omega,lambda_bar,tau_eps,kp_defect\n";
    for (const auto& r : report.rows)
        out << format_double(r.epsilon) << ',' << format_double(r.density_error) << ','
            << format_double(r.lambda_bar) << ',' << format_double(r.tau_eps) << ','
            << format_double(r.kp_defect) << '\n';
    return out.str();
}

std::string stability_json(const StabilityReport& report)
{
    nlohmann::ordered_json j;
    j["tau0"] = report.tau0;
    j["lambda_r"] = report.lambda_r;
    j["bound"] = report.bound;
    j["status"] = report.status();
    j["rate_slack"] = report.rate_slack;
    j["subdominant"] = report.subdominant;
    j["seed"] = report.seed;
    j["failures"] = report.failures;
    j["flags"] = report.flags;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"epsilon", r.epsilon},
                        {"tau_spread", r.tau_spread},
                        {"iterations", r.iterations}});
    return j.dump(2) + "\n";
}

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw ConfigError("cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f)
            throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace fiberspec
