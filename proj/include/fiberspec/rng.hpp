#ifndef FIBERSPEC_RNG_HPP
#define FIBERSPEC_RNG_HPP

#include <cstdint>
#include <random>

namespace fiberspec {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `counter` under `master`: splitmix64(master ^ splitmix64(counter)).
/// Streams depend only on (master, counter), never on scheduling order.
constexpr std::uint64_t derive_stream(std::uint64_t master, std::uint64_t counter)
{
    return splitmix64(master ^ splitmix64(counter));
}

/// mt19937_64 with a platform-independent mapping to [0, 1).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

private:
    std::mt19937_64 engine_;
};

} // namespace fiberspec

#endif
