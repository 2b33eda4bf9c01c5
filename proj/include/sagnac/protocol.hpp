#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sagnac/optics.hpp"
#include "sagnac/rng.hpp"

namespace sagnac {

/// One BB84 symbol. Basis 0 encodes with phases {0, pi}, basis 1 with
/// {pi/2, 3*pi/2}.
struct Bb84Symbol {
    std::uint8_t bit = 0;
    std::uint8_t basis = 0;

    /// Flat index 0..3 ordered by encoded phase {0, pi/2, pi, 3pi/2}.
    int phase_index() const { return 2 * bit + basis; }
    static Bb84Symbol from_phase_index(int k) {
        return {static_cast<std::uint8_t>((k / 2) & 1),
                static_cast<std::uint8_t>(k & 1)};
    }

    friend bool operator==(Bb84Symbol a, Bb84Symbol b) {
        return a.bit == b.bit && a.basis == b.basis;
    }
};

PhaseShift encode_phase(Bb84Symbol symbol);

/// Receiver basis phase: basis 0 -> 0, basis 1 -> pi/2.
PhaseShift bob_phase(int basis);

enum class Port : std::uint8_t { none, ch1, ch2 };

struct MeasureOutcome {
    Port port = Port::none;
    bool double_click = false; // both detectors fired; port holds the coin flip

    friend bool operator==(MeasureOutcome a, MeasureOutcome b) {
        return a.port == b.port && a.double_click == b.double_click;
    }
};

/// Port-to-bit convention: ch2 is constructive at zero phase difference and
/// decodes bit 0; ch1 decodes bit 1.
int decoded_bit(Port port);

/// Gated measurement of one pulse. The channel loss in `optics` attenuates
/// `mean_photon_number` photons down to the detectors; `drift_offset` is
/// added to the interferometer phase. Double clicks resolve by a fair coin.
MeasureOutcome measure(PhaseShift alice_phase, PhaseShift bob_phase,
                       double mean_photon_number, double drift_offset,
                       const OpticsConfig& optics, PulseRng& rng);

/// Same, at the configured photon number and with no drift.
MeasureOutcome measure(PhaseShift alice_phase, PhaseShift bob_phase,
                       const OpticsConfig& optics, PulseRng& rng);

enum class IntensityLabel : std::uint8_t { signal, decoy, vacuum };

const char* to_string(IntensityLabel label);

struct IntensityClass {
    IntensityLabel label = IntensityLabel::signal;
    double mean_photon_number = 0.8;
};

/// Probabilities and photon numbers for the intensity classes a sender mixes
/// into the pulse train. The default plan is signal-only.
struct DecoyPlan {
    struct Entry {
        IntensityLabel label = IntensityLabel::signal;
        double mean_photon_number = 0.8;
        double probability = 1.0;
    };
    std::vector<Entry> entries;

    static DecoyPlan signal_only(double mean_photon_number);
    void validate() const;
    const Entry* find(IntensityLabel label) const;
};

IntensityClass assign_intensity(PulseRng& rng, const DecoyPlan& plan);

struct PulseRecord {
    std::uint64_t index = 0;
    double time = 0.0; // seconds since run start, index / repetition rate
    Bb84Symbol alice;
    IntensityClass intensity;
    std::uint8_t bob_basis = 0;
    MeasureOutcome outcome;
    bool eve_touched = false;

    bool detected() const { return outcome.port != Port::none; }
    bool sifted() const { return detected() && bob_basis == alice.basis; }
};

struct BitPair {
    std::uint8_t alice = 0;
    std::uint8_t bob = 0;
};

/// Keep detected, basis-matched records and decode the receiver bit from the
/// click port. A fixed receiver basis needs no special casing: its records
/// all carry the same bob_basis.
std::vector<BitPair> sift(std::span<const PulseRecord> records);

struct QberEstimate {
    double qber = 0.0;
    double std_error = 0.0;
    std::uint64_t sifted_count = 0;
    std::uint64_t error_count = 0;
};

/// Binomial QBER estimate with its statistical error bar. Throws on empty
/// input.
QberEstimate estimate_qber(std::span<const BitPair> sifted);

struct IntensityStats {
    std::uint64_t sent = 0;
    std::uint64_t detected = 0;
    double gain = 0.0; // detected / sent
    QberEstimate qber;
};

std::map<IntensityLabel, IntensityStats>
per_intensity_stats(std::span<const PulseRecord> records);

} // namespace sagnac
