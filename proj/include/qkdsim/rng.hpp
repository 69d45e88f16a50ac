#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qkdsim {

// splitmix64 finalizer; used for seed derivation only, never as the stream itself.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent seed lanes for the pipeline stages. Each code index gets its own
// stream per lane, so codes can be processed in any order (or in parallel)
// with bit-identical results.
enum class Lane : std::uint64_t {
    Alice = 1,
    Channel = 2,
    Rotation = 3,
    Bob = 4,
    Reveal = 5,
    Sweep = 6,
    Distill = 7,
};

inline std::uint64_t derive_seed(std::uint64_t master, Lane lane, std::uint64_t index) {
    const std::uint64_t h =
        splitmix64(master ^ (0x517cc1b727220a95ULL * static_cast<std::uint64_t>(lane)));
    return splitmix64(h ^ splitmix64(index));
}

// mt19937_64 wrapper producing portable draws. uniform() and gaussian() are
// built directly from the raw 64-bit stream (the engine sequence is fixed by
// the standard), so a seed gives the same values on every platform; the
// implementation-defined std <random> distributions are deliberately avoided.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; consumes exactly two uniforms per call.
    double gaussian(double mean, double sigma) {
        const double u1 = 1.0 - uniform();  // (0, 1]; keeps log() finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace qkdsim
