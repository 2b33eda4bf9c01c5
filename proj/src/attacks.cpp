#include "sagnac/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sagnac {

namespace {

int symbol_bit(int k) { return (k / 2) & 1; }
int symbol_basis(int k) { return k & 1; }
double ideal_phase(int k) { return k * (kPi / 2.0); }

double born_probability(double state_phase, double analyzer_angle) {
    const double c = std::cos((state_phase - analyzer_angle) / 2.0);
    return c * c;
}

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

} // namespace

void RemapConfig::validate() const {
    require(std::isfinite(delta) && delta > 0.0 && delta <= kPi / 2.0,
            "remap delta must lie in (0, pi/2]");
}

std::array<double, 4> remapped_phase_set(double delta) {
    RemapConfig{delta}.validate();
    return {0.0, delta, 2.0 * delta, 3.0 * delta};
}

double remap_delta_from_fiber(double eve_length_delta,
                              const ModulatorConfig& modulator) {
    modulator.validate();
    require(std::isfinite(eve_length_delta) && eve_length_delta > 0.0,
            "eavesdropper fiber length must be positive");
    // The legitimate drive step for one pi/2 phase increment.
    const double frequency_step = (kPi / 2.0) / modulator.phase_per_hertz();
    // The same step acting over the eavesdropper's length.
    ModulatorConfig eve = modulator;
    eve.delay_length = eve_length_delta;
    const double delta = eve.phase_per_hertz() * frequency_step;
    if (!(delta > 0.0 && delta <= kPi / 2.0 + 1e-12))
        throw std::invalid_argument(
            "eavesdropper geometry yields a remap step outside (0, pi/2]");
    return std::min(delta, kPi / 2.0);
}

OutcomeRule OutcomeRule::resend(int symbol_index) {
    if (symbol_index < 0 || symbol_index > 3)
        throw std::invalid_argument("resend symbol index must be 0..3");
    OutcomeRule rule;
    rule.action = EveAction::resend;
    rule.resend_symbol = static_cast<std::uint8_t>(symbol_index);
    rule.guess_bit = static_cast<std::uint8_t>(symbol_bit(symbol_index));
    rule.guess_basis = static_cast<std::uint8_t>(symbol_basis(symbol_index));
    return rule;
}

void EveStrategy::validate() const {
    if (measurements.empty())
        throw std::invalid_argument("strategy must hold at least one measurement");
    double total = 0.0;
    for (const EveMeasurement& m : measurements) {
        require(std::isfinite(m.analyzer_angle), "analyzer angle must be finite");
        require(std::isfinite(m.probability) && m.probability >= 0.0,
                "measurement probability must be >= 0");
        for (const OutcomeRule& rule : m.outcomes) {
            if (rule.action == EveAction::resend && rule.resend_symbol > 3)
                throw std::invalid_argument("resend symbol index must be 0..3");
            if (rule.guess_bit > 1 || rule.guess_basis > 1)
                throw std::invalid_argument("guess bit and basis must be 0 or 1");
        }
    }
    for (const EveMeasurement& m : measurements) total += m.probability;
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("measurement probabilities must sum to 1");
}

EveStrategy EveStrategy::canonical_intercept_resend() {
    EveStrategy s;
    // Basis-0 analyzer: outcomes project onto phases {0, pi}.
    s.measurements.push_back(
        {0.0, 0.5, {OutcomeRule::resend(0), OutcomeRule::resend(2)}});
    // Basis-1 analyzer: outcomes project onto phases {pi/2, 3pi/2}.
    s.measurements.push_back(
        {kPi / 2.0, 0.5, {OutcomeRule::resend(1), OutcomeRule::resend(3)}});
    return s;
}

AttackResult evaluate_attack(const EveStrategy& strategy, const RemapConfig& remap,
                             const OpticsConfig& optics) {
    strategy.validate();
    remap.validate();
    optics.validate();

    const std::array<double, 4> phases = remapped_phase_set(remap.delta);

    AttackResult result;
    double sift_weight = 0.0;
    double error_weight = 0.0;
    double known_weight = 0.0;
    double vacuum_weight = 0.0;

    for (int k = 0; k < 4; ++k) {
        result.per_symbol[k].sent_weight = 0.25;
        for (const EveMeasurement& m : strategy.measurements) {
            for (int o = 0; o < 2; ++o) {
                const double analyzer = m.analyzer_angle + o * kPi;
                const double w =
                    0.25 * m.probability * born_probability(phases[k], analyzer);
                const OutcomeRule& rule = m.outcomes[o];
                if (rule.action == EveAction::vacuum) {
                    vacuum_weight += w;
                    result.per_symbol[k].suppressed_weight += w;
                    continue;
                }
                const double resent = ideal_phase(rule.resend_symbol);
                const int b = symbol_basis(k); // sift keeps receiver basis == b
                const double wb = 0.5 * w;     // receiver picks b with prob 1/2
                const double p_bit0 = born_probability(resent, b * (kPi / 2.0));
                const double p_error = symbol_bit(k) == 0 ? 1.0 - p_bit0 : p_bit0;
                sift_weight += wb;
                error_weight += wb * p_error;
                result.per_symbol[k].sifted_weight += wb;
                result.per_symbol[k].error_weight += wb * p_error;
                if (symbol_basis(rule.resend_symbol) == b &&
                    rule.guess_bit == symbol_bit(rule.resend_symbol))
                    known_weight += wb;
            }
        }
    }

    if (!(sift_weight > 0.0))
        throw std::runtime_error(
            "no detections: the strategy suppresses every pulse");

    result.qber = error_weight / sift_weight;
    result.eve_information = known_weight / sift_weight;
    result.detection_suppression = vacuum_weight;
    return result;
}

namespace {

// (error weight, sift weight) contributed by one measurement outcome when it
// resends `symbol`, summed over sender symbols and the matching receiver
// basis.
struct OutcomeYield {
    double error = 0.0;
    double sift = 0.0;
};

OutcomeYield outcome_yield(const std::array<double, 4>& phases, double analyzer,
                           int resend_symbol) {
    OutcomeYield y;
    const double resent = ideal_phase(resend_symbol);
    for (int k = 0; k < 4; ++k) {
        const double wb = 0.5 * 0.25 * born_probability(phases[k], analyzer);
        const double p_bit0 =
            born_probability(resent, symbol_basis(k) * (kPi / 2.0));
        const double p_error = symbol_bit(k) == 0 ? 1.0 - p_bit0 : p_bit0;
        y.sift += wb;
        y.error += wb * p_error;
    }
    return y;
}

struct PolicySolution {
    double qber = 1.0;
    std::array<int, 2> actions{-1, -1}; // -1 = vacuum, else resend symbol
    bool feasible = false;
};

// Best per-outcome resend-or-vacuum table for a single analyzer setting,
// found by Dinkelbach iteration on the error/sift ratio.
PolicySolution best_policy(const std::array<double, 4>& phases, double analyzer) {
    std::array<std::array<OutcomeYield, 4>, 2> yields;
    for (int o = 0; o < 2; ++o)
        for (int s = 0; s < 4; ++s)
            yields[o][s] = outcome_yield(phases, analyzer + o * kPi, s);

    PolicySolution best;
    double lambda = 0.25;
    for (int iter = 0; iter < 64; ++iter) {
        std::array<int, 2> choice{-1, -1};
        double error = 0.0, sift = 0.0;
        for (int o = 0; o < 2; ++o) {
            double best_score = 0.0; // vacuum contributes nothing
            for (int s = 0; s < 4; ++s) {
                const double score =
                    yields[o][s].error - lambda * yields[o][s].sift;
                if (score < best_score - 1e-18) {
                    best_score = score;
                    choice[o] = s;
                }
            }
            if (choice[o] >= 0) {
                error += yields[o][choice[o]].error;
                sift += yields[o][choice[o]].sift;
            }
        }
        if (!(sift > 0.0)) {
            // All-vacuum beat every resend at this lambda; fall back to the
            // single outcome/resend pair with the best ratio.
            for (int o = 0; o < 2; ++o)
                for (int s = 0; s < 4; ++s) {
                    if (!(yields[o][s].sift > 0.0)) continue;
                    const double q = yields[o][s].error / yields[o][s].sift;
                    if (!best.feasible || q < best.qber) {
                        best.feasible = true;
                        best.qber = q;
                        best.actions = {o == 0 ? s : -1, o == 1 ? s : -1};
                    }
                }
            return best;
        }
        const double q = error / sift;
        if (!best.feasible || q < best.qber - 1e-16) {
            best.feasible = true;
            best.qber = q;
            best.actions = choice;
        }
        if (std::fabs(q - lambda) < 1e-15) break;
        lambda = q;
    }
    return best;
}

struct Candidate {
    double qber = 1.0;
    double delta = 0.0;
    double analyzer = 0.0;
    std::array<int, 2> actions{-1, -1};
    bool valid = false;
};

void consider(Candidate& best, double delta, double analyzer) {
    const PolicySolution sol = best_policy(remapped_phase_set(delta), analyzer);
    if (!sol.feasible) return;
    // Ties resolve toward the lexicographically smaller parameter vector.
    if (!best.valid || sol.qber < best.qber - 1e-15 ||
        (std::fabs(sol.qber - best.qber) <= 1e-15 &&
         (delta < best.delta ||
          (delta == best.delta && analyzer < best.analyzer)))) {
        best = {sol.qber, delta, analyzer, sol.actions, true};
    }
}

// Mirror of a strategy under k -> 3-k (the remapped set maps onto itself
// about its midpoint, ideal states map index-wise). Splitting the search
// optimum 50/50 with its mirror gives the same QBER with the two-analyzer
// shape of the family.
EveStrategy symmetric_strategy(const Candidate& c) {
    EveStrategy s;
    EveMeasurement primary;
    primary.analyzer_angle = PhaseShift(c.analyzer).radians();
    primary.probability = 0.5;
    EveMeasurement mirrored;
    mirrored.analyzer_angle = PhaseShift(3.0 * c.delta - c.analyzer).radians();
    mirrored.probability = 0.5;
    for (int o = 0; o < 2; ++o) {
        if (c.actions[o] < 0) {
            primary.outcomes[o] = OutcomeRule::suppress();
            mirrored.outcomes[o] = OutcomeRule::suppress();
        } else {
            primary.outcomes[o] = OutcomeRule::resend(c.actions[o]);
            mirrored.outcomes[o] = OutcomeRule::resend(3 - c.actions[o]);
        }
    }
    s.measurements = {primary, mirrored};
    return s;
}

} // namespace

OptimizedAttack optimize_attack(const OptimizeBounds& bounds,
                                const OpticsConfig& optics) {
    require(std::isfinite(bounds.delta_min) && bounds.delta_min > 0.0,
            "delta_min must be positive");
    require(bounds.delta_max <= kPi / 2.0 + 1e-12,
            "delta_max must not exceed pi/2");
    require(bounds.delta_step > 0.0, "delta_step must be positive");
    if (bounds.delta_min > bounds.delta_max)
        throw std::runtime_error(
            "empty feasible set: no remap step within the bounds");

    Candidate best;
    const double delta_hi = std::min(bounds.delta_max, kPi / 2.0);
    for (double delta = bounds.delta_min; delta <= delta_hi + 1e-12;
         delta += bounds.delta_step) {
        const double d = std::min(delta, delta_hi);
        // Analyzer grid scaled to the remap wedge: the informative outcomes
        // sit near the direction opposite the states.
        for (int i = -30; i <= 90; ++i)
            consider(best, d, kPi + (i * 0.05) * d);
        // Coarse absolute grid catches wide-delta structure.
        for (int i = 0; i < 256; ++i)
            consider(best, d, i * (kTwoPi / 256.0));
    }
    if (!best.valid)
        throw std::runtime_error(
            "empty feasible set: the family admits no resend policy");

    // Compass refinement on (delta, analyzer) with the policy re-solved at
    // every probe.
    double step_delta = bounds.delta_step;
    double step_angle = 0.05 * best.delta;
    while (step_delta > 1e-10 || step_angle > 1e-12) {
        Candidate trial = best;
        consider(trial, std::min(delta_hi, best.delta + step_delta), best.analyzer);
        consider(trial, std::max(bounds.delta_min, best.delta - step_delta),
                 best.analyzer);
        consider(trial, best.delta, best.analyzer + step_angle);
        consider(trial, best.delta, best.analyzer - step_angle);
        if (trial.qber < best.qber - 1e-15) {
            best = trial;
        } else {
            step_delta *= 0.5;
            step_angle *= 0.5;
        }
    }

    OptimizedAttack out;
    out.remap = RemapConfig{best.delta};
    out.strategy = symmetric_strategy(best);
    out.result = evaluate_attack(out.strategy, out.remap, optics);
    return out;
}

OptimizedAttack optimize_attack_at_delta(double delta, const OpticsConfig& optics) {
    OptimizeBounds bounds;
    bounds.delta_min = delta;
    bounds.delta_max = delta;
    bounds.delta_step = 1.0;
    return optimize_attack(bounds, optics);
}

SecurityAssessment security_margin(double qber) {
    require(std::isfinite(qber) && qber >= 0.0 && qber <= 1.0,
            "QBER must lie in [0, 1]");
    return qber < kBb84SecureQberBound
               ? SecurityAssessment::within_proven_secure_regime
               : SecurityAssessment::insecure_regime;
}

const char* to_string(SecurityAssessment assessment) {
    switch (assessment) {
    case SecurityAssessment::within_proven_secure_regime:
        return "within proven-secure regime";
    case SecurityAssessment::insecure_regime:
        return "insecure regime";
    }
    return "?";
}

std::optional<std::string>
remap_scenario_objection(const ModulatorConfig& modulator) {
    modulator.validate();
    if (modulator.paired_aoms)
        return "paired up/down AOMs introduce no net frequency shift, so the "
               "encoded phase cannot be remapped by an injected pulse";
    return std::nullopt;
}

} // namespace sagnac
