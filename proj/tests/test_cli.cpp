#include "fiberspec/cli.hpp"
#include "fiberspec/errors.hpp"
#include "fiberspec/serialization.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace fiberspec;
namespace fs = std::filesystem;

namespace {

fs::path config(const std::string& name)
{
    return fs::path(FIBERSPEC_CONFIG_DIR) / name;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "fiberspec");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

/// Fresh scratch directory per test case.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("fiberspec_cli_" + name))
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }

    fs::path write(const std::string& name, const Json& j) const
    {
        std::ofstream(dir / name) << j.dump(2);
        return dir / name;
    }
};

} // namespace

TEST_CASE("spectrum: doubling")
{
    Scratch s("spectrum_doubling");
    const Run r = run({"spectrum", config("doubling_deterministic.json").string(), "--out", s.dir.string()});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j.at("tau0").get<double>() == 0.0);
    CHECK(j.at("lambda_r").get<double>() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(j.at("rho0_norm").get<double>() == doctest::Approx(1.0).epsilon(1e-14));
    const auto rows = read_csv(s.dir / "density.csv");
    CHECK(rows.size() == 512);
    for (const auto& row : rows)
        CHECK(row[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("spectrum: perturbed map has a positive density")
{
    Scratch s("spectrum_a05");
    const Run r = run({"spectrum", config("a05_deterministic.json").string(), "--out", s.dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = read_csv(s.dir / "density.csv");
    REQUIRE(rows.size() == 512);
    double lo = 1e300;
    for (const auto& row : rows)
        lo = std::min(lo, row[1]);
    CHECK(lo > 0.0);
    const Json j = Json::parse(r.out);
    CHECK(j.at("rho0_min").get<double>() > 0.0);
    CHECK(j.at("tau0").get<double>() < 1.0);
    CHECK(j.at("lambda_r").get<double>() < 1.0);
}

TEST_CASE("spectrum: degree 3")
{
    Scratch s("spectrum_deg3");
    const Run r = run({"spectrum", config("degree3_deterministic.json").string(), "--out", s.dir.string()});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j.at("tau0").get<double>() == 0.0);
    CHECK(j.at("lambda_r").get<double>() == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("config errors exit 2")
{
    Scratch s("errors");
    CHECK(run({"spectrum", (s.dir / "missing.json").string()}).code == 2);
    std::ofstream(s.dir / "broken.json") << "{ not json";
    CHECK(run({"spectrum", (s.dir / "broken.json").string()}).code == 2);

    Json j = load_json_file(config("a05_parametric_rotation.json"));
    j["epsilons"] = {0.6, 0.1};
    const Run bad = run({"stability", s.write("eps.json", j).string(), "--out", s.dir.string()});
    CHECK(bad.code == 2);
    CHECK_FALSE(bad.err.empty());
    CHECK_FALSE(fs::exists(s.dir / "stability.csv"));
}

TEST_CASE("stability: additive doubling passes with exact densities")
{
    Scratch s("stability_additive");
    const Run r = run({"stability", config("doubling_additive_rotation.json").string(), "--out", s.dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("PASS", 0) == 0);
    const auto rows = read_csv(s.dir / "stability.csv");
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows)
        CHECK(row[1] < 1e-10);
    const Json j = Json::parse(slurp(s.dir / "stability.json"));
    CHECK(j.at("status") == "PASS");
}

TEST_CASE("stability: failing clauses exit 4 and still write the report")
{
    Scratch s("stability_fail");
    Json j = load_json_file(config("a05_parametric_shift.json"));
    j["tolerances"] = {{"rate_slack", -0.5}};
    const Run neg = run({"stability", s.write("neg.json", j).string(), "--out", s.dir.string()});
    CHECK(neg.code == 2);

    // a bound that no positive rate can meet
    j["tolerances"] = {{"error_ratio", 0.0}};
    const Run r = run({"stability", s.write("strict.json", j).string(), "--out", s.dir.string()});
    CHECK(r.code == 4);
    CHECK(r.out.rfind("FAILED", 0) == 0);
    CHECK(fs::exists(s.dir / "stability.csv"));
    CHECK(Json::parse(slurp(s.dir / "stability.json")).at("status") == "FAILED");
}

TEST_CASE("stability: seeds do not change the CSV")
{
    Scratch s("stability_seeds");
    const auto a = s.dir / "a", b = s.dir / "b", c = s.dir / "c";
    fs::create_directories(a);
    fs::create_directories(b);
    fs::create_directories(c);
    const std::string cfg = config("a05_parametric_shift.json").string();
    REQUIRE(run({"stability", cfg, "--out", a.string(), "--seed", "1"}).code == 0);
    REQUIRE(run({"stability", cfg, "--out", b.string(), "--seed", "99"}).code == 0);
    REQUIRE(run({"stability", cfg, "--out", c.string(), "--seed", "1"}).code == 0);
    CHECK(slurp(a / "stability.csv") == slurp(b / "stability.csv"));
    CHECK(slurp(a / "stability.csv") == slurp(c / "stability.csv"));
    CHECK(slurp(a / "stability.json") == slurp(c / "stability.json"));
    CHECK(Json::parse(slurp(b / "stability.json")).at("seed").get<std::uint64_t>() == 99);
}

TEST_CASE("corr: doubling rows")
{
    Scratch s("corr_doubling");
    const Run r = run({"corr", config("doubling_deterministic.json").string(), "--out", s.dir.string(),
                       "--omega", "0.3", "--nmax", "6"});
    REQUIRE(r.code == 0);
    const auto rows = read_csv(s.dir / "corr.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][0] == 1.0);
    CHECK(rows[0][1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rows[1][0] == 2.0);
    CHECK(std::abs(rows[1][1]) < 1e-12);
    CHECK(Json::parse(r.out).at("tau").get<double>() == 0.0);
}

TEST_CASE("corr: constant phi gives zeros")
{
    Scratch s("corr_const");
    Json j = load_json_file(config("a05_parametric_rotation.json"));
    j["observables"] = {{"phi", {{"c0", 1.0}, {"terms", Json::array()}}}};
    const Run r = run({"corr", s.write("c.json", j).string(), "--out", s.dir.string(), "--samples", "4"});
    REQUIRE(r.code == 0);
    for (const auto& row : read_csv(s.dir / "corr.csv"))
        CHECK(std::abs(row[1]) < 1e-12);
    CHECK(Json::parse(r.out).at("tau").get<double>() == 0.0);
}

TEST_CASE("corr: shift-base additive rate")
{
    Scratch s("corr_shift");
    const Run r = run({"corr", config("doubling_additive_shift.json").string(), "--out", s.dir.string(),
                       "--omega", "1,0,1,1,0,0"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out).at("tau").get<double>() <= 0.55);
    const Run samples = run({"corr", config("doubling_additive_shift.json").string(), "--out",
                             s.dir.string(), "--samples", "8"});
    REQUIRE(samples.code == 0);
    CHECK(Json::parse(samples.out).at("tau").get<double>() <= 0.55);
    CHECK(Json::parse(samples.out).at("omega_points").get<int>() == 8);
}

TEST_CASE("corr: perturbed map rate below the bound")
{
    Scratch s("corr_a05");
    const Run spec = run({"spectrum", config("a05_deterministic.json").string(), "--out", s.dir.string()});
    REQUIRE(spec.code == 0);
    const double bound = Json::parse(spec.out).at("bound").get<double>();
    const Run r = run({"corr", config("a05_parametric_rotation.json").string(), "--out", s.dir.string(),
                       "--omega", "0.25"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out).at("tau").get<double>() <= bound + 0.05);
    CHECK(run({"corr", config("a05_parametric_rotation.json").string(), "--omega", "abc"}).code == 2);
    CHECK(run({"corr", config("a05_parametric_rotation.json").string(), "--omega", "0.1", "--samples", "3"})
              .code == 2);
}

TEST_CASE("help lists every flag; unknown flags exit 2")
{
    const Run h = run({"--help"});
    CHECK(h.code == 0);
    for (const char* w : {"spectrum", "stability", "corr"})
        CHECK(h.out.find(w) != std::string::npos);
    const Run hc = run({"corr", "--help"});
    CHECK(hc.code == 0);
    for (const char* flag : {"--out", "--seed", "--omega", "--samples", "--nmax"})
        CHECK(hc.out.find(flag) != std::string::npos);
    const Run hs = run({"stability", "--help"});
    for (const char* flag : {"--out", "--seed"})
        CHECK(hs.out.find(flag) != std::string::npos);
    CHECK(run({"stability", config("doubling_additive_rotation.json").string(), "--bogus"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
}

TEST_CASE("serialization round trips")
{
    const CircleMap m(3, {{2, 0.2, -0.3}, {5, 0.01, 0.0}}, 2.0, 0.125);
    CHECK(map_from_json(to_json(m)) == m);
    CHECK_THROWS_AS(map_from_json(Json{{"degree", 2}, {"coeffs", {{1, 1.5, 0.0}}}}), ConfigError);

    for (const BaseSystem& b : {BaseSystem::rotation(0.3), BaseSystem::piecewise_doubling(),
                                BaseSystem::shift({0.2, 0.8}), BaseSystem::piecewise_affine({0.0, 0.3, 1.0})}) {
        const BaseSystem c = base_from_json(to_json(b));
        CHECK(c.variant() == b.variant());
        CHECK(c.alpha() == b.alpha());
        CHECK(c.breaks() == b.breaks());
        CHECK(c.probabilities() == b.probabilities());
    }
    CHECK_THROWS_AS(base_from_json(Json{{"variant", "tent"}}), ConfigError);

    const NoiseKind kinds[] = {AdditiveNoise{}, ParametricNoise{2, ParametricNoise::Coefficient::B}};
    for (const auto& k : kinds)
        CHECK(noise_kind_from_json(to_json(k)) == k);
    const NoiseProfile profiles[] = {NoiseProfile{}, NoiseProfile{{-1.0, 0.25}}};
    for (const auto& p : profiles)
        CHECK(noise_profile_from_json(to_json(p)) == p);

    const RandomMapFamily fam(oracle::perturbed(), ParametricNoise{}, NoiseProfile{{-1.0, 1.0}}, 0.2);
    const RandomMapFamily back = family_from_json(to_json(fam));
    CHECK(back.f0() == fam.f0());
    CHECK(back.kind() == fam.kind());
    CHECK(back.profile() == fam.profile());
    CHECK(back.epsilon() == fam.epsilon());

    for (const char* name : {"a05_parametric_shift.json", "a05_parametric_rotation.json",
                             "doubling_additive_piecewise.json"}) {
        const ExperimentConfig cfg = config_from_json(load_json_file(config(name)));
        const Json once = to_json(cfg);
        CHECK(to_json(config_from_json(once)) == once);
    }

    const Json op = to_json(assemble_fourier(oracle::doubling(), 8));
    CHECK(op.at("basis") == "fourier");
    CHECK(op.at("n") == 17);
    CHECK(op.at("data").size() == 17 * 17);
}

TEST_CASE("FIBERSPEC_SEED overrides the config seed")
{
    Scratch s("env_seed");
    ::setenv("FIBERSPEC_SEED", "4242", 1);
    const Run r = run({"stability", config("doubling_additive_shift.json").string(), "--out", s.dir.string()});
    ::unsetenv("FIBERSPEC_SEED");
    REQUIRE(r.code == 0);
    CHECK(Json::parse(slurp(s.dir / "stability.json")).at("seed").get<std::uint64_t>() == 4242);
    const Run flag = run({"stability", config("doubling_additive_shift.json").string(), "--out", s.dir.string(),
                          "--seed", "7"});
    REQUIRE(flag.code == 0);
    CHECK(Json::parse(slurp(s.dir / "stability.json")).at("seed").get<std::uint64_t>() == 7);
}
