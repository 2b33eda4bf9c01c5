#include "sagnac/optics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sagnac {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

} // namespace

PhaseShift::PhaseShift(double radians) {
    require(std::isfinite(radians), "phase must be finite");
    double v = std::fmod(radians, kTwoPi);
    if (v < 0.0) v += kTwoPi;
    if (v >= kTwoPi) v = 0.0; // fmod rounding can land exactly on 2*pi
    value_ = v;
}

double wrap_to_pm_pi(double radians) {
    double v = std::fmod(radians + kPi, kTwoPi);
    if (v < 0.0) v += kTwoPi;
    return v - kPi;
}

void ModulatorConfig::validate() const {
    require(std::isfinite(effective_index) && effective_index >= 1.0 &&
                effective_index <= 2.0,
            "modulator.effective_index must be within [1, 2]");
    require(std::isfinite(delay_length) && delay_length > 0.0,
            "modulator.delay_length must be positive");
    require(std::isfinite(base_frequency) && base_frequency > 0.0,
            "modulator.base_frequency must be positive");
    require(std::isfinite(frequency_resolution) && frequency_resolution > 0.0,
            "modulator.frequency_resolution must be positive");
}

double ModulatorConfig::phase_per_hertz() const {
    const double single = kTwoPi * effective_index * delay_length / kSpeedOfLight;
    return paired_aoms ? 2.0 * single : single;
}

void OpticsConfig::validate() const {
    require(std::isfinite(visibility) && visibility >= 0.0 && visibility <= 1.0,
            "optics.visibility must be within [0, 1]");
    require(std::isfinite(loop_length) && loop_length >= 0.0,
            "optics.loop_length must be >= 0");
    require(std::isfinite(attenuation) && attenuation >= 0.0,
            "optics.attenuation must be >= 0");
    require(std::isfinite(insertion_loss) && insertion_loss >= 0.0,
            "optics.insertion_loss must be >= 0");
    require(std::isfinite(detector_efficiency) && detector_efficiency > 0.0 &&
                detector_efficiency <= 1.0,
            "optics.detector_efficiency must be within (0, 1]");
    require(std::isfinite(dark_count_prob) && dark_count_prob >= 0.0 &&
                dark_count_prob < 1.0,
            "optics.dark_count_prob must be within [0, 1)");
    require(std::isfinite(mean_photon_number) && mean_photon_number >= 0.0,
            "optics.mean_photon_number must be >= 0");
}

double OpticsConfig::transmittance() const {
    return channel_transmittance(loop_length, attenuation, insertion_loss);
}

PhaseShift phase_shift(double frequency, const ModulatorConfig& config) {
    config.validate();
    require(std::isfinite(frequency), "drive frequency must be finite");
    require(frequency >= 0.0, "drive frequency must be >= 0");

    // Work in whole interference cycles so the mod-2*pi reduction stays
    // accurate for drives of many MHz; a pair imprints exactly twice the
    // single-shifter phase.
    double cycles = config.effective_index * config.delay_length * frequency /
                    kSpeedOfLight;
    if (config.paired_aoms) cycles *= 2.0;
    return PhaseShift(kTwoPi * (cycles - std::floor(cycles)));
}

double frequency_for_phase(PhaseShift target, const ModulatorConfig& config) {
    config.validate();
    const double k = config.phase_per_hertz();
    const double exact_increment = target.radians() / k;

    double steps = std::round(exact_increment / config.frequency_resolution);
    if (steps < 0.0) steps = 0.0;
    const double frequency =
        config.base_frequency + steps * config.frequency_resolution;

    const double residual =
        wrap_to_pm_pi(k * (frequency - config.base_frequency) - target.radians());
    if (std::fabs(residual) > 0.01 * kPi) {
        throw std::invalid_argument(
            "frequency resolution " + std::to_string(config.frequency_resolution) +
            " Hz cannot realize the requested phase to better than 1% of pi");
    }
    return frequency;
}

ArmProbabilities arm_probabilities(PhaseShift delta_phi, double visibility) {
    require(std::isfinite(visibility) && visibility >= 0.0 && visibility <= 1.0,
            "visibility must be within [0, 1]");
    double ch1 = 0.5 * (1.0 - visibility * std::cos(delta_phi.radians()));
    if (ch1 < 0.0) ch1 = 0.0;
    if (ch1 > 1.0) ch1 = 1.0;
    return {ch1, 1.0 - ch1};
}

double qber_from_visibility(double visibility) {
    require(std::isfinite(visibility) && visibility >= 0.0 && visibility <= 1.0,
            "visibility must be within [0, 1]");
    return 0.5 * (1.0 - visibility);
}

double channel_transmittance(double loop_length_km, double attenuation_db_per_km,
                             double insertion_loss_db) {
    require(std::isfinite(loop_length_km) && loop_length_km >= 0.0,
            "loop length must be >= 0");
    require(std::isfinite(attenuation_db_per_km) && attenuation_db_per_km >= 0.0,
            "attenuation must be >= 0");
    require(std::isfinite(insertion_loss_db) && insertion_loss_db >= 0.0,
            "insertion loss must be >= 0");
    const double budget_db =
        loop_length_km * attenuation_db_per_km + insertion_loss_db;
    return std::pow(10.0, -budget_db / 10.0);
}

double click_probability(double mean_photons_at_detectors, double detector_efficiency,
                         double dark_count_prob, double arm_probability) {
    require(std::isfinite(mean_photons_at_detectors) &&
                mean_photons_at_detectors >= 0.0,
            "mean photon number must be >= 0");
    require(std::isfinite(detector_efficiency) && detector_efficiency >= 0.0 &&
                detector_efficiency <= 1.0,
            "detector efficiency must be within [0, 1]");
    require(std::isfinite(dark_count_prob) && dark_count_prob >= 0.0 &&
                dark_count_prob < 1.0,
            "dark count probability must be within [0, 1)");
    require(std::isfinite(arm_probability) && arm_probability >= 0.0 &&
                arm_probability <= 1.0,
            "arm probability must be within [0, 1]");
    const double exponent =
        detector_efficiency * mean_photons_at_detectors * arm_probability;
    return 1.0 - (1.0 - dark_count_prob) * std::exp(-exponent);
}

DetectorClickProbabilities click_probabilities(double mean_photons_at_detectors,
                                               double detector_efficiency,
                                               double dark_count_prob,
                                               ArmProbabilities arms) {
    return {click_probability(mean_photons_at_detectors, detector_efficiency,
                              dark_count_prob, arms.ch1),
            click_probability(mean_photons_at_detectors, detector_efficiency,
                              dark_count_prob, arms.ch2)};
}

} // namespace sagnac
