#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sagnac/sim.hpp"

using namespace sagnac;

namespace {

SimConfig lossless_config(double visibility, double mu, double dark = 0.0) {
    SimConfig cfg;
    cfg.optics.visibility = visibility;
    cfg.optics.loop_length = 0.0;
    cfg.optics.attenuation = 0.0;
    cfg.optics.insertion_loss = 0.0;
    cfg.optics.detector_efficiency = 1.0;
    cfg.optics.dark_count_prob = dark;
    cfg.optics.mean_photon_number = mu;
    cfg.decoy = DecoyPlan::signal_only(mu);
    cfg.drift.enabled = false;
    return cfg;
}

} // namespace

TEST_CASE("drift is frozen at zero sigma") {
    DriftConfig cfg;
    cfg.sigma = 0.0;
    DriftState state;
    PulseRng rng(1, 0);
    for (int i = 0; i < 1000; ++i) state = drift_step(state, cfg, 1e-3, rng);
    CHECK(state.phase_offset == 0.0);
    CHECK(state.elapsed == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(drift_step(state, cfg, 0.0, rng), std::invalid_argument);
}

TEST_CASE("drift variance grows like sigma^2 * T") {
    DriftConfig cfg;
    cfg.sigma = 6e-3;
    const double horizon = 100.0;
    const double dt = 0.1;
    const int replicas = 4000;
    std::vector<double> finals(replicas);
    for (int r = 0; r < replicas; ++r) {
        DriftState state;
        PulseRng rng(500 + r, 0);
        for (double t = 0.0; t < horizon - 1e-9; t += dt)
            state = drift_step(state, cfg, dt, rng);
        finals[r] = state.phase_offset;
    }
    const double mean =
        std::accumulate(finals.begin(), finals.end(), 0.0) / replicas;
    double var = 0.0;
    for (double v : finals) var += (v - mean) * (v - mean);
    var /= replicas - 1;
    const double expected = cfg.sigma * cfg.sigma * horizon;
    // sample variance of a Gaussian: sd ~ sigma^2 T sqrt(2/(n-1))
    const double tolerance = 3.0 * expected * std::sqrt(2.0 / (replicas - 1));
    CHECK(std::fabs(var - expected) <= tolerance);
}

TEST_CASE("a frozen drift offset shifts the matched-basis QBER") {
    const double theta = 0.30;
    SimConfig cfg = lossless_config(0.96, 0.1);
    cfg.pulses = 2000000;
    cfg.qber_window = cfg.pulses;
    cfg.master_seed = 404;

    // Emulate a stuck offset: run the measurement path directly.
    std::uint64_t sifted = 0, errors = 0;
    for (std::uint64_t i = 0; i < cfg.pulses; ++i) {
        PulseRng rng(cfg.master_seed, pulse_stream(i, kProtocolLane));
        const std::uint8_t bit = static_cast<std::uint8_t>(rng.next_below(2));
        const MeasureOutcome out = measure(encode_phase({bit, 0}), bob_phase(0),
                                           0.1, theta, cfg.optics, rng);
        if (out.port == Port::none) continue;
        ++sifted;
        if (decoded_bit(out.port) != bit) ++errors;
    }
    const double expected =
        oracles::matched_basis_expectation(cfg.optics, theta).sifted_qber;
    const double qber = double(errors) / double(sifted);
    CHECK(std::fabs(qber - expected) <=
          oracles::binomial_3sigma(expected, double(sifted)));
    // and the shifted rate tracks (1 - V cos theta)/2 up to multi-photon bias
    CHECK(expected ==
          doctest::Approx(0.5 * (1.0 - 0.96 * std::cos(theta))).epsilon(0.02));
}

TEST_CASE("identical configs give identical runs regardless of threading") {
    SimConfig cfg = lossless_config(0.96, 0.3, 5e-5);
    cfg.pulses = 120000;
    cfg.qber_window = 10000;
    cfg.master_seed = 777;
    cfg.drift.enabled = true;
    cfg.mode = RunMode::full;

    auto [records1, summary1] = run_protocol(cfg);
    auto [records2, summary2] = run_protocol(cfg);
    SimConfig threaded = cfg;
    threaded.threads = 4;
    auto [records3, summary3] = run_protocol(threaded);

    REQUIRE(records1.size() == records2.size());
    REQUIRE(records1.size() == records3.size());
    for (std::size_t i = 0; i < records1.size(); ++i) {
        CHECK(records1[i].outcome == records2[i].outcome);
        CHECK(records1[i].outcome == records3[i].outcome);
        CHECK(records1[i].alice == records3[i].alice);
        CHECK(records1[i].bob_basis == records3[i].bob_basis);
        CHECK(records1[i].time == records3[i].time);
    }
    CHECK(summary1 == summary2);
    CHECK(summary1 == summary3);
}

TEST_CASE("vacuum input decays to coin-flip errors at the dark-count floor") {
    SimConfig cfg = lossless_config(0.96, 0.0, 5e-5);
    cfg.pulses = 20000000;
    cfg.qber_window = cfg.pulses;
    cfg.master_seed = 515;
    const RunSummary summary = run_protocol_streamed(cfg, nullptr);

    const double floor = 1.0 - (1.0 - 5e-5) * (1.0 - 5e-5);
    const double rate =
        double(summary.total_detected) / double(summary.total_sent);
    CHECK(std::fabs(rate - floor) <=
          oracles::binomial_3sigma(floor, double(summary.total_sent)));
    REQUIRE(summary.overall.sifted_count > 100);
    CHECK(std::fabs(summary.overall.qber - 0.5) <=
          oracles::binomial_3sigma(0.5, double(summary.overall.sifted_count)));
}

TEST_CASE("Monte Carlo agrees with the closed-form composition") {
    SimConfig cfg = lossless_config(0.96, 0.1, 5e-5);
    cfg.pulses = 3000000;
    cfg.qber_window = cfg.pulses;
    cfg.master_seed = 616;
    const RunSummary summary = run_protocol_streamed(cfg, nullptr);

    const auto expected = oracles::matched_basis_expectation(cfg.optics);
    REQUIRE(summary.overall.sifted_count >= 100000);
    CHECK(std::fabs(summary.overall.qber - expected.sifted_qber) <=
          oracles::binomial_3sigma(expected.sifted_qber,
                                   double(summary.overall.sifted_count)));
    const double rate =
        double(summary.total_detected) / double(summary.total_sent);
    CHECK(std::fabs(rate - expected.detection_rate) <=
          oracles::binomial_3sigma(expected.detection_rate,
                                   double(summary.total_sent)));
}

TEST_CASE("simulated QBER traces (1-V)/2 across visibilities") {
    int point = 0;
    for (double v : {0.90, 0.96, 0.99}) {
        SimConfig cfg = lossless_config(v, 0.05);
        cfg.pulses = 4500000;
        cfg.qber_window = cfg.pulses;
        cfg.master_seed = 717 + point++;
        const RunSummary summary = run_protocol_streamed(cfg, nullptr);
        REQUIRE(summary.overall.sifted_count >= 100000);
        const double expected =
            oracles::matched_basis_expectation(cfg.optics).sifted_qber;
        CHECK(std::fabs(expected - qber_from_visibility(v)) < 2e-4);
        CHECK(std::fabs(summary.overall.qber - expected) <=
              oracles::binomial_3sigma(expected,
                                       double(summary.overall.sifted_count)));
    }
}

TEST_CASE("summarize windows partition the sifted stream") {
    SimConfig cfg = lossless_config(0.9, 0.4, 1e-4);
    cfg.pulses = 50000;
    cfg.qber_window = 7000;
    cfg.master_seed = 818;
    cfg.mode = RunMode::full;
    auto [records, summary] = run_protocol(cfg);

    const RunSummary rebuilt = summarize(records, cfg.qber_window);
    CHECK(rebuilt == summary);

    std::uint64_t window_errors = 0, window_sifted = 0;
    for (const WindowQber& w : summary.qber_series) {
        window_errors += w.estimate.error_count;
        window_sifted += w.estimate.sifted_count;
    }
    CHECK(window_errors == summary.overall.error_count);
    CHECK(window_sifted == summary.overall.sifted_count);

    const RunSummary single = summarize(records, cfg.pulses);
    REQUIRE(single.qber_series.size() == 1);
    CHECK(single.qber_series[0].estimate.qber == summary.overall.qber);
}

TEST_CASE("a default-scale run matches the composed sift expectation") {
    SimConfig cfg; // stock hardware numbers, 100K pulses
    cfg.pulses = 100000;
    cfg.drift.enabled = false;
    cfg.master_seed = 919;
    const RunSummary summary = run_protocol_streamed(cfg, nullptr);
    const auto expected = oracles::matched_basis_expectation(cfg.optics);
    // half the pulses are basis-matched; detection is alignment-independent
    const double sift_rate = 0.5 * expected.detection_rate;
    CHECK(std::fabs(double(summary.overall.sifted_count) / cfg.pulses -
                    sift_rate) <=
          oracles::binomial_3sigma(sift_rate, double(cfg.pulses)));
}

TEST_CASE("runs with no detections raise the warning flag") {
    SimConfig cfg = lossless_config(1.0, 0.0, 0.0);
    cfg.pulses = 5000;
    cfg.qber_window = 1000;
    const RunSummary summary = run_protocol_streamed(cfg, nullptr);
    CHECK(summary.no_detections);
    CHECK(summary.qber_series.empty());
    CHECK(summary.total_detected == 0);
}

TEST_CASE("replayed symbol files drive the sender deterministically") {
    SimConfig cfg = lossless_config(1.0, 60.0);
    cfg.pulses = 4000;
    cfg.qber_window = 4000;
    cfg.replay = {{{0, 0}, {}}, {{1, 0}, {}}, {{0, 1}, {}}, {{1, 1}, {}}};
    auto [records, summary] = run_protocol(cfg);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].alice == cfg.replay[i % 4].symbol);
    }
    // perfect visibility, bright pulses, fixed basis 0: matched symbols decode
    // exactly
    for (const PulseRecord& r : records) {
        if (!r.sifted()) continue;
        CHECK(decoded_bit(r.outcome.port) == int(r.alice.bit));
    }
    CHECK(summary.overall.error_count == 0);
}

TEST_CASE("attack replay reproduces the exact evaluation") {
    SimConfig cfg = lossless_config(1.0, 4.0);
    cfg.pulses = 40000000;
    cfg.qber_window = cfg.pulses;
    cfg.master_seed = 1021;

    OptimizeBounds bounds;
    bounds.delta_min = 0.12; // replay-friendly kept fraction
    const OptimizedAttack best = optimize_attack(bounds, cfg.optics);
    cfg.attack = AttackConfig{best.remap, best.strategy};

    const RunSummary summary = run_protocol_streamed(cfg, nullptr);
    REQUIRE(summary.overall.sifted_count >= 100000);
    CHECK(std::fabs(summary.overall.qber - best.result.qber) <=
          oracles::binomial_3sigma(best.result.qber,
                                   double(summary.overall.sifted_count)));
    // suppression shows up as the vanished detections
    const double detect_rate =
        double(summary.total_detected) / double(summary.total_sent);
    CHECK(detect_rate ==
          doctest::Approx(1.0 - best.result.detection_suppression).epsilon(0.05));
}

TEST_CASE("attack scenarios against paired shifters refuse to run") {
    SimConfig cfg = lossless_config(1.0, 1.0);
    cfg.modulator.paired_aoms = true;
    cfg.attack = AttackConfig{RemapConfig{0.5},
                              EveStrategy::canonical_intercept_resend()};
    CHECK(scenario_objection(cfg).has_value());
    CHECK_THROWS_AS(run_protocol_streamed(cfg, nullptr), std::invalid_argument);
}

TEST_CASE("config validation rejects impossible runs") {
    SimConfig cfg;
    cfg.pulses = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    cfg.qber_window = cfg.pulses + 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    cfg.repetition_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimConfig{};
    cfg.threads = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
