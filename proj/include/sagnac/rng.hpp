#pragma once

#include <cmath>
#include <cstdint>

namespace sagnac {

/// Counter-based random stream: every (master_seed, stream) pair yields an
/// independent deterministic sequence, so pulses can be simulated in any
/// order or in parallel without changing the results.
class PulseRng {
public:
    PulseRng(std::uint64_t master_seed, std::uint64_t stream)
        : state_(fmix64((master_seed ^ 0x9E3779B97F4A7C15ULL) +
                        0x9E3779B97F4A7C15ULL * (stream + 1))) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1]; safe as a log() argument.
    double next_unit_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    std::uint32_t next_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(next_u64() % n);
    }

    bool next_bool() { return (next_u64() & 1ULL) != 0; }

    /// Standard normal deviate (Box-Muller, fixed two-draw consumption).
    double next_gaussian() {
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586 * u2);
    }

private:
    static std::uint64_t fmix64(std::uint64_t k) {
        k ^= k >> 33;
        k *= 0xFF51AFD7ED558CCDULL;
        k ^= k >> 33;
        k *= 0xC4CEB9FE1A85EC53ULL;
        k ^= k >> 33;
        return k;
    }

    std::uint64_t state_;
};

// Stream-id layout for per-pulse substreams. Lane 0 feeds the phase-drift
// walk, lane 1 feeds all other per-pulse draws.
inline std::uint64_t pulse_stream(std::uint64_t pulse_index, std::uint64_t lane) {
    return pulse_index * 2 + lane;
}

inline constexpr std::uint64_t kDriftLane = 0;
inline constexpr std::uint64_t kProtocolLane = 1;

} // namespace sagnac
