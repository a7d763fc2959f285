#ifndef FIBERSPEC_SERIALIZATION_HPP
#define FIBERSPEC_SERIALIZATION_HPP

#include "fiberspec/base.hpp"
#include "fiberspec/experiments.hpp"
#include "fiberspec/maps.hpp"
#include "fiberspec/skewprod.hpp"
#include "fiberspec/transfer.hpp"

#include <json.hpp>

#include <filesystem>

namespace fiberspec {

using Json = nlohmann::ordered_json;

// All *_from_json functions throw ConfigError on malformed or invalid input.

/// {degree, coeffs: [[k, a, b], ...], r}
Json to_json(const CircleMap& map);
CircleMap map_from_json(const Json& j);

/// {"variant": "rotation", "alpha"} | {"variant": "piecewise_doubling"} |
/// {"variant": "piecewise_affine", "breaks", "density"} | {"variant": "shift", "p"}
Json to_json(const BaseSystem& base);
BaseSystem base_from_json(const Json& j);

/// "additive" | {"parametric": {"k", "coefficient": "a" | "b"}}
Json to_json(const NoiseKind& kind);
NoiseKind noise_kind_from_json(const Json& j);

/// "cos" | {"levels": [...]}
Json to_json(const NoiseProfile& profile);
NoiseProfile noise_profile_from_json(const Json& j);

/// {f0, noise_kind, s_profile, epsilon}
Json to_json(const RandomMapFamily& fam);
RandomMapFamily family_from_json(const Json& j);

/// {"c0", "terms": [[k, a, b], ...]}: c0 + sum a cos(2 pi k x) + b sin(2 pi k x).
FiberFunction observable_from_json(const Json& j, int truncation);

/// Experiment configuration document; see README for the schema.
ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);

/// {basis, n, data (row-major)}; Fourier entries are [re, im] pairs.
Json to_json(const OperatorMatrix& op);

Json load_json_file(const std::filesystem::path& path);

} // namespace fiberspec

#endif
