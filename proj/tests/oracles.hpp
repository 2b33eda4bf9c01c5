#pragma once

// Test-only closed-form oracles, kept independent of the simulation loop
// they check. Everything here is straight probability algebra over the
// optics building blocks.

#include <cmath>

#include "sagnac/optics.hpp"

namespace oracles {

struct MatchedBasisExpectation {
    double p_wrong_click = 0.0;
    double p_right_click = 0.0;
    double p_detect = 0.0;     // any click on a matched-basis pulse
    double p_error = 0.0;      // wrong-only plus half of the doubles
    double sifted_qber = 0.0;  // p_error / p_detect
    double detection_rate = 0.0; // any click, any basis alignment
};

// Expected statistics of a matched-basis pulse with the interferometer
// offset by `theta`: the wrong arm carries (1 - V cos theta)/2 of the light,
// each gated detector clicks independently, and a double click resolves by a
// fair coin.
inline MatchedBasisExpectation
matched_basis_expectation(const sagnac::OpticsConfig& optics, double theta = 0.0) {
    const double transmittance = sagnac::channel_transmittance(
        optics.loop_length, optics.attenuation, optics.insertion_loss);
    const double x = optics.detector_efficiency * optics.mean_photon_number *
                     transmittance;
    const double wrong_arm = 0.5 * (1.0 - optics.visibility * std::cos(theta));
    const double d = optics.dark_count_prob;

    MatchedBasisExpectation e;
    e.p_wrong_click = 1.0 - (1.0 - d) * std::exp(-x * wrong_arm);
    e.p_right_click = 1.0 - (1.0 - d) * std::exp(-x * (1.0 - wrong_arm));
    e.p_detect = 1.0 - (1.0 - e.p_wrong_click) * (1.0 - e.p_right_click);
    e.p_error = e.p_wrong_click * (1.0 - e.p_right_click) +
                0.5 * e.p_wrong_click * e.p_right_click;
    e.sifted_qber = e.p_error / e.p_detect;
    // Any-click probability does not depend on how the light splits between
    // the arms: 1 - (1-d)^2 exp(-x).
    e.detection_rate = 1.0 - (1.0 - d) * (1.0 - d) * std::exp(-x);
    return e;
}

// Three-sigma binomial half-width around probability p over n trials.
inline double binomial_3sigma(double p, double n) {
    return 3.0 * std::sqrt(p * (1.0 - p) / n);
}

} // namespace oracles
