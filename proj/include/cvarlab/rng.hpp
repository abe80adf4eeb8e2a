#pragma once

#include <cstdint>

namespace cvarlab {

/// SplitMix64 in counter mode: output i of stream s under a seed is a pure
/// function of (seed, s, i), so substreams are identical whether rollouts run
/// serially or on a worker pool.
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream)
        : state_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ull))) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    uint32_t next_below(uint32_t n) { return static_cast<uint32_t>(next_u64() % n); }

    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
};

} // namespace cvarlab
