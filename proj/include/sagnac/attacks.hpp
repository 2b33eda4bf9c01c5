#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sagnac/optics.hpp"
#include "sagnac/protocol.hpp"

namespace sagnac {

/// Phase remap imposed by an eavesdropper who drives the sender's modulator
/// from her own geometry: the four BB84 phases collapse to {0, d, 2d, 3d}.
struct RemapConfig {
    double delta = kPi / 2.0; // radians, (0, pi/2]; pi/2 is the identity remap

    void validate() const;
};

std::array<double, 4> remapped_phase_set(double delta);

/// Phase step the eavesdropper obtains when the legitimate per-symbol drive
/// increment acts over her fiber length instead of the legitimate one.
/// Throws when the resulting step leaves (0, pi/2].
double remap_delta_from_fiber(double eve_length_delta,
                              const ModulatorConfig& modulator);

enum class EveAction : std::uint8_t { resend, vacuum };

/// What the eavesdropper does on one measurement outcome: resend one of the
/// four ideal BB84 states (recording a bit/basis guess) or suppress the
/// pulse, hiding inside channel loss.
struct OutcomeRule {
    EveAction action = EveAction::vacuum;
    std::uint8_t resend_symbol = 0; // phase index 0..3 -> {0, pi/2, pi, 3pi/2}
    std::uint8_t guess_bit = 0;
    std::uint8_t guess_basis = 0;

    static OutcomeRule resend(int symbol_index);
    static OutcomeRule suppress() { return {}; }
};

/// Projective measurement on the equator of the phase-encoded qubit. The
/// two outcomes project onto analyzer_angle and analyzer_angle + pi, with
/// Born probability cos^2((phi - angle)/2).
struct EveMeasurement {
    double analyzer_angle = 0.0;
    double probability = 1.0;
    std::array<OutcomeRule, 2> outcomes{};
};

struct EveStrategy {
    std::vector<EveMeasurement> measurements;

    void validate() const;

    /// Measure a uniformly random BB84 basis and resend the projected state.
    static EveStrategy canonical_intercept_resend();
};

struct SymbolBreakdown {
    double sent_weight = 0.0;
    double suppressed_weight = 0.0;
    double sifted_weight = 0.0;
    double error_weight = 0.0;
};

struct AttackResult {
    double qber = 0.0;
    /// Share of the sifted key whose value the resend policy pins down
    /// deterministically to the guess the eavesdropper recorded (the resent
    /// state's basis matched the sifted basis).
    double eve_information = 0.0;
    /// Fraction of all pulses the eavesdropper suppressed.
    double detection_suppression = 0.0;
    std::array<SymbolBreakdown, 4> per_symbol{};
};

/// Exact expectation over sender symbols x eavesdropper outcomes x receiver
/// bases, with an ideal receiver measurement of the resent state. QBER is
/// conditioned on detection and basis match. Throws when the strategy
/// suppresses every pulse ("no detections").
AttackResult evaluate_attack(const EveStrategy& strategy, const RemapConfig& remap,
                             const OpticsConfig& optics);

struct OptimizeBounds {
    double delta_min = 1.0e-3; // radians; remap steps below ~1 mrad are
    double delta_max = kPi / 2.0; // treated as physically implausible
    double delta_step = 1.0e-3;
};

struct OptimizedAttack {
    RemapConfig remap;
    EveStrategy strategy;
    AttackResult result;
};

/// Minimize the induced QBER over the strategy family (up to two analyzer
/// settings, per-outcome resend-or-vacuum policies with recorded guesses)
/// and the remap step, by grid search plus derivative-free refinement.
/// Throws when the bounds admit no strategy that resends anything.
OptimizedAttack optimize_attack(const OptimizeBounds& bounds,
                                const OpticsConfig& optics);

/// Best strategy for one fixed remap step; used by parameter sweeps.
OptimizedAttack optimize_attack_at_delta(double delta, const OpticsConfig& optics);

enum class SecurityAssessment : std::uint8_t {
    within_proven_secure_regime, // QBER below the proof threshold: the key
                                 // would be accepted, so an attack here bites
    insecure_regime,
};

/// Proof threshold for standard BB84: key distillation is known to fail at
/// or above this error rate.
inline constexpr double kBb84SecureQberBound = 0.189;

SecurityAssessment security_margin(double qber);
const char* to_string(SecurityAssessment assessment);

/// Paired up/down shifters add no net frequency shift, which removes the
/// remapping entry point; returns the reason a scenario cannot run, if any.
std::optional<std::string>
remap_scenario_objection(const ModulatorConfig& modulator);

} // namespace sagnac
