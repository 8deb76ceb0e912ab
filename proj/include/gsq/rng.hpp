// Counter-based random number generation (SplitMix64) with named substreams.
//
// All stochastic components of the toolkit draw from this generator so that
// disorder realizations and trajectory sampling are reproducible bit-for-bit
// from a single master seed. SplitMix64 is a counter-based generator: the
// i-th output is a fixed avalanche mix of (state0 + i*GAMMA), so streams can
// be split by deriving independent state0 values for each (seed, tag) pair.

#ifndef GSQ_RNG_HPP
#define GSQ_RNG_HPP

#include <cstdint>

namespace gsq {

namespace rng_detail {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace rng_detail

// Stream tags. Keeping these fixed guarantees that e.g. adding more DTWA
// samples never perturbs the graph-disorder stream.
enum class RngStream : std::uint64_t {
    graph = 0x6772617068ULL,   // disorder realizations (dilution, bond erasure)
    dtwa = 0x64747761ULL,      // discrete Wigner initial conditions
    sweep = 0x7377656570ULL,   // per-sweep-point seed fan-out
    bootstrap = 0x62747374ULL, // resampling in statistical estimators
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(rng_detail::mix(seed)) {}
    Rng(std::uint64_t seed, RngStream stream)
        : state_(rng_detail::mix(seed ^ rng_detail::mix(static_cast<std::uint64_t>(stream)))) {}

    std::uint64_t next_u64() {
        state_ += rng_detail::kGamma;
        return rng_detail::mix(state_);
    }

    // Uniform in [0,1) with 53 random bits; portable across platforms.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // +1 or -1 with equal probability.
    double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection-free modulo bias is < 2^-53 for the n used here; use the
        // multiply-shift reduction which is exact enough and branch-free.
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    }

    // UniformRandomBitGenerator interface.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ULL; }
    result_type operator()() { return next_u64(); }

private:
    std::uint64_t state_;
};

// Deterministic seed for a sweep point, keyed by the point's identity
// (control value and system size) rather than its position in the sweep
// list, so re-ordering sweep values cannot change any point's results.
inline std::uint64_t point_seed(std::uint64_t master, double control, std::uint64_t size) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(control));
    __builtin_memcpy(&bits, &control, sizeof(bits));
    std::uint64_t h = rng_detail::mix(master ^ rng_detail::mix(bits));
    return rng_detail::mix(h ^ rng_detail::mix(size));
}

// Seed for the i-th sample (trajectory or disorder realization) of a point.
inline std::uint64_t sample_seed(std::uint64_t point, std::uint64_t index) {
    return rng_detail::mix(point + (index + 1) * rng_detail::kGamma);
}

} // namespace gsq

#endif
