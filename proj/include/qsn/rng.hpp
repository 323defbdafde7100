#pragma once

#include <cstdint>

namespace qsn {

// Counter-based SplitMix64 generator. Cheap to seed, no warm-up, and
// substreams derived from (seed, stream) hash pairs are independent of the
// order streams are created in, which keeps parallel Monte Carlo runs
// bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Substream for e.g. one Monte Carlo trial: mixes the stream id into the
    // seed so trial i always sees the same draws regardless of scheduling.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        return Rng(mix(seed ^ mix(stream_id + 0x9E3779B97F4A7C15ULL)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace qsn
