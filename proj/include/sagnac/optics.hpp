#pragma once

#include <utility>

namespace sagnac {

/// Vacuum speed of light, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// An optical phase in radians, kept reduced to [0, 2*pi).
class PhaseShift {
public:
    PhaseShift() = default;
    explicit PhaseShift(double radians);

    double radians() const { return value_; }

    friend PhaseShift operator+(PhaseShift a, PhaseShift b) {
        return PhaseShift(a.value_ + b.value_);
    }
    friend PhaseShift operator-(PhaseShift a, PhaseShift b) {
        return PhaseShift(a.value_ - b.value_);
    }
    friend bool operator==(PhaseShift a, PhaseShift b) {
        return a.value_ == b.value_;
    }

private:
    double value_ = 0.0;
};

/// Wrap an angle difference into [-pi, pi).
double wrap_to_pm_pi(double radians);

/// Frequency-shift phase modulator geometry: an AOM (or a counter-driven
/// pair) followed by a fiber delay of length `delay_length`. The phase
/// between the two counter-propagating pulses is set by the drive frequency.
struct ModulatorConfig {
    double effective_index = 1.468;   // fiber group index
    double delay_length = 700.0;      // m, loop asymmetry or inter-AOM fiber
    bool paired_aoms = false;         // up/down shifter pair (no net shift)
    double base_frequency = 40.0e6;   // Hz, drive for the zero-phase symbol
    double frequency_resolution = 1.0; // Hz, driver granularity

    void validate() const;

    /// Phase imprinted per hertz of drive: 2*pi*n*L/C, doubled for a pair.
    double phase_per_hertz() const;
};

/// Sagnac loop + detection parameters.
struct OpticsConfig {
    double visibility = 0.96;
    double loop_length = 40.0;        // km
    double attenuation = 0.2;         // dB/km
    double insertion_loss = 3.0;      // dB, lumped component losses
    double detector_efficiency = 0.10;
    double dark_count_prob = 5.0e-5;  // per gating window, per detector
    double mean_photon_number = 0.8;  // at the sender's output

    void validate() const;
    double transmittance() const;
};

/// Relative phase imprinted between the counter-propagating pulses when the
/// modulator is driven at `frequency`: 2*pi*n*L*f/C for a single shifter,
/// 4*pi*n*L*f/C for a paired one, reduced mod 2*pi.
PhaseShift phase_shift(double frequency, const ModulatorConfig& config);

/// Smallest drive frequency >= base_frequency whose phase shift relative to
/// the base drive equals `target`, snapped to the driver's frequency grid.
/// Throws if the grid cannot realize the phase to better than 1% of pi.
double frequency_for_phase(PhaseShift target, const ModulatorConfig& config);

struct ArmProbabilities {
    double ch1; // (1 - V cos dphi) / 2, destructive at dphi = 0
    double ch2; // complement; ch1 + ch2 == 1 exactly
};

ArmProbabilities arm_probabilities(PhaseShift delta_phi, double visibility);

/// Intrinsic error rate of an interferometer with visibility V: (1 - V)/2.
double qber_from_visibility(double visibility);

/// Power transmittance of the loop: 10^-(L*alpha + insertion)/10.
double channel_transmittance(double loop_length_km, double attenuation_db_per_km,
                             double insertion_loss_db);

/// Click probability of one gated detector watching a weak coherent pulse:
/// 1 - (1 - p_dark) * exp(-eta * mu * p_arm).
double click_probability(double mean_photons_at_detectors, double detector_efficiency,
                         double dark_count_prob, double arm_probability);

struct DetectorClickProbabilities {
    double ch1;
    double ch2;
};

/// Both detectors evaluated independently, each with its own arm probability.
DetectorClickProbabilities click_probabilities(double mean_photons_at_detectors,
                                               double detector_efficiency,
                                               double dark_count_prob,
                                               ArmProbabilities arms);

} // namespace sagnac
