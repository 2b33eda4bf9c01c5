#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <random>

#include "attack_oracle.hpp"
#include "sagnac/attacks.hpp"

using namespace sagnac;
using attack_oracle::brute_force;
using attack_oracle::random_strategy;

namespace {

OpticsConfig ideal_optics() {
    OpticsConfig o;
    o.visibility = 1.0;
    o.loop_length = 0.0;
    o.attenuation = 0.0;
    o.insertion_loss = 0.0;
    o.detector_efficiency = 1.0;
    o.dark_count_prob = 0.0;
    o.mean_photon_number = 4.0;
    return o;
}

} // namespace

TEST_CASE("remapped phase set") {
    const auto identity = remapped_phase_set(kPi / 2);
    CHECK(identity[0] == 0.0);
    CHECK(identity[1] == kPi / 2);
    CHECK(identity[2] == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(identity[3] == doctest::Approx(3 * kPi / 2).epsilon(1e-15));

    const auto squeezed = remapped_phase_set(kPi / 4);
    CHECK(squeezed[1] == kPi / 4);
    CHECK(squeezed[2] == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(squeezed[3] == doctest::Approx(3 * kPi / 4).epsilon(1e-15));

    for (double delta : {0.01, 0.5, 1.2}) {
        const auto set = remapped_phase_set(delta);
        for (int k = 1; k < 4; ++k)
            CHECK(set[k] - set[k - 1] == doctest::Approx(delta).epsilon(1e-12));
    }

    CHECK_THROWS_AS(remapped_phase_set(0.0), std::invalid_argument);
    CHECK_THROWS_AS(remapped_phase_set(2.0), std::invalid_argument);
}

TEST_CASE("remap delta from the eavesdropper's fiber length") {
    ModulatorConfig m;
    m.effective_index = 1.468;
    m.delay_length = 700.0;
    m.base_frequency = 40e6;
    m.frequency_resolution = 1.0;

    CHECK(remap_delta_from_fiber(m.delay_length, m) ==
          doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(remap_delta_from_fiber(m.delay_length / 2, m) ==
          doctest::Approx(kPi / 4).epsilon(1e-12));
    CHECK(remap_delta_from_fiber(1e-6, m) > 0.0);
    CHECK(remap_delta_from_fiber(1e-6, m) < 1e-8);

    CHECK_THROWS_AS(remap_delta_from_fiber(0.0, m), std::invalid_argument);
    CHECK_THROWS_AS(remap_delta_from_fiber(2 * m.delay_length, m),
                    std::invalid_argument);

    // Pairing doubles the phase slope but also halves the legitimate drive
    // step, so the remap stays (pi/2) * (eve length / legit length).
    ModulatorConfig paired = m;
    paired.paired_aoms = true;
    CHECK(remap_delta_from_fiber(m.delay_length / 2, paired) ==
          doctest::Approx(kPi / 4).epsilon(1e-12));
    CHECK(remap_delta_from_fiber(m.delay_length, paired) ==
          doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("canonical intercept-resend at the identity remap costs exactly 25%") {
    const AttackResult result =
        evaluate_attack(EveStrategy::canonical_intercept_resend(),
                        RemapConfig{kPi / 2}, ideal_optics());
    CHECK(std::fabs(result.qber - 0.25) <= 1e-12);
    CHECK(std::fabs(result.eve_information - 0.5) <= 1e-12);
    CHECK(result.detection_suppression == 0.0);
}

TEST_CASE("fixed resend pins the matched basis and randomizes the other") {
    EveStrategy fixed;
    EveMeasurement m;
    m.analyzer_angle = 0.0;
    m.probability = 1.0;
    m.outcomes = {OutcomeRule::resend(0), OutcomeRule::resend(0)};
    fixed.measurements.push_back(m);

    const AttackResult result =
        evaluate_attack(fixed, RemapConfig{kPi / 2}, ideal_optics());
    CHECK(result.qber == doctest::Approx(0.5).epsilon(1e-12));
    // Basis-0 sifted events: receiver bit forced to 0, so symbols 0 and 2
    // carry no and full error weight respectively.
    const SymbolBreakdown& zero = result.per_symbol[0];
    const SymbolBreakdown& two = result.per_symbol[2];
    CHECK(zero.error_weight == 0.0);
    CHECK(two.error_weight == doctest::Approx(two.sifted_weight).epsilon(1e-12));
    // Basis-1 rows err half the time.
    for (int k : {1, 3})
        CHECK(result.per_symbol[k].error_weight ==
              doctest::Approx(0.5 * result.per_symbol[k].sifted_weight)
                  .epsilon(1e-12));
}

TEST_CASE("suppressing every pulse leaves nothing to evaluate") {
    EveStrategy vac;
    EveMeasurement m;
    m.analyzer_angle = 1.0;
    m.probability = 1.0;
    m.outcomes = {OutcomeRule::suppress(), OutcomeRule::suppress()};
    vac.measurements.push_back(m);
    CHECK_THROWS_WITH_AS(evaluate_attack(vac, RemapConfig{0.5}, ideal_optics()),
                         doctest::Contains("no detections"), std::runtime_error);
}

TEST_CASE("evaluate_attack matches the brute-force enumeration to 1e-12") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> deltas(0.01, kPi / 2);
    int checked = 0;
    while (checked < 25) {
        const EveStrategy s = random_strategy(gen);
        const double delta = deltas(gen);
        AttackResult result;
        try {
            result = evaluate_attack(s, RemapConfig{delta}, ideal_optics());
        } catch (const std::runtime_error&) {
            continue; // fully suppressive draw
        }
        const auto expected = brute_force(s, delta);
        CHECK(std::fabs(result.qber - expected.qber) <= 1e-12);
        CHECK(std::fabs(result.eve_information - expected.information) <= 1e-12);
        CHECK(std::fabs(result.detection_suppression - expected.suppression) <=
              1e-12);
        ++checked;
    }
}

TEST_CASE("strategy validation") {
    EveStrategy empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

    EveStrategy lopsided = EveStrategy::canonical_intercept_resend();
    lopsided.measurements[0].probability = 0.8; // 0.8 + 0.5 != 1
    CHECK_THROWS_AS(lopsided.validate(), std::invalid_argument);

    CHECK_THROWS_AS(OutcomeRule::resend(4), std::invalid_argument);
}

TEST_CASE("optimize restricted to the identity remap recovers the 25% floor") {
    OptimizeBounds identity;
    identity.delta_min = kPi / 2;
    identity.delta_max = kPi / 2;
    identity.delta_step = 1.0;
    const OptimizedAttack best = optimize_attack(identity, ideal_optics());
    CHECK(best.remap.delta == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(best.result.qber == doctest::Approx(0.25).epsilon(1e-9));

    // Exhaustive oracle at the identity remap: dense analyzer grid with every
    // per-outcome policy choice.
    double floor = 1.0;
    for (int i = 0; i < 4096; ++i) {
        const double theta = i * (kTwoPi / 4096.0);
        for (int a0 = -1; a0 < 4; ++a0)
            for (int a1 = -1; a1 < 4; ++a1) {
                if (a0 < 0 && a1 < 0) continue;
                EveStrategy s;
                EveMeasurement m;
                m.analyzer_angle = theta;
                m.probability = 1.0;
                m.outcomes[0] = a0 < 0 ? OutcomeRule::suppress()
                                       : OutcomeRule::resend(a0);
                m.outcomes[1] = a1 < 0 ? OutcomeRule::suppress()
                                       : OutcomeRule::resend(a1);
                s.measurements.push_back(m);
                floor = std::min(
                    floor,
                    evaluate_attack(s, RemapConfig{kPi / 2}, ideal_optics()).qber);
            }
    }
    CHECK(best.result.qber <= floor + 1e-9);
    CHECK(floor == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("full-family optimum sits at the small-delta floor") {
    const OptimizedAttack best = optimize_attack(OptimizeBounds{}, ideal_optics());
    // (4 - sqrt(6)) / 10, the delta -> 0 limit of the family
    const double analytic_floor = (4.0 - std::sqrt(6.0)) / 10.0;
    CHECK(best.result.qber >= analytic_floor - 1e-9);
    CHECK(best.result.qber <= analytic_floor + 5e-4);
    CHECK(best.result.qber >= 0.0);
    CHECK(best.result.qber <= 0.25); // identity remap is in the family
    CHECK(security_margin(best.result.qber) ==
          SecurityAssessment::within_proven_secure_regime);
    // every kept outcome carries a recorded guess
    for (const EveMeasurement& m : best.strategy.measurements)
        for (const OutcomeRule& rule : m.outcomes)
            if (rule.action == EveAction::resend) {
                CHECK(rule.guess_bit <= 1);
                CHECK(rule.guess_basis <= 1);
            }
}

TEST_CASE("enlarging the family never raises the optimum") {
    const OpticsConfig o = ideal_optics();
    OptimizeBounds wide; // [1 mrad, pi/2]
    OptimizeBounds mid;
    mid.delta_min = 0.12;
    OptimizeBounds narrow;
    narrow.delta_min = kPi / 2;
    narrow.delta_max = kPi / 2;
    narrow.delta_step = 1.0;

    const double q_wide = optimize_attack(wide, o).result.qber;
    const double q_mid = optimize_attack(mid, o).result.qber;
    const double q_narrow = optimize_attack(narrow, o).result.qber;
    CHECK(q_wide <= q_mid + 1e-12);
    CHECK(q_mid <= q_narrow + 1e-12);
}

TEST_CASE("optimizer reports an empty feasible set") {
    OptimizeBounds impossible;
    impossible.delta_min = 1.0;
    impossible.delta_max = 0.5;
    CHECK_THROWS_AS(optimize_attack(impossible, ideal_optics()),
                    std::runtime_error);
}

TEST_CASE("security margin against the proven bound") {
    CHECK(security_margin(0.146) ==
          SecurityAssessment::within_proven_secure_regime);
    CHECK(security_margin(0.0) ==
          SecurityAssessment::within_proven_secure_regime);
    CHECK(security_margin(0.189) == SecurityAssessment::insecure_regime);
    CHECK(security_margin(0.1889) ==
          SecurityAssessment::within_proven_secure_regime);
    CHECK(security_margin(0.5) == SecurityAssessment::insecure_regime);
    CHECK_THROWS_AS(security_margin(-0.1), std::invalid_argument);
}

TEST_CASE("paired shifters close the remapping entry point") {
    ModulatorConfig paired;
    paired.paired_aoms = true;
    CHECK(remap_scenario_objection(paired).has_value());
    paired.paired_aoms = false;
    CHECK_FALSE(remap_scenario_objection(paired).has_value());
}
