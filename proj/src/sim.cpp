#include "sagnac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace sagnac {

DriftState drift_step(DriftState state, const DriftConfig& config, double dt,
                      PulseRng& rng) {
    if (!(dt > 0.0))
        throw std::invalid_argument("drift step dt must be positive");
    const double increment =
        config.enabled ? config.sigma * std::sqrt(dt) * rng.next_gaussian() : 0.0;
    return {state.phase_offset + increment, state.elapsed + dt};
}

void SimConfig::validate() const {
    if (pulses == 0) throw std::invalid_argument("pulses must be positive");
    if (!(repetition_rate > 0.0) || !std::isfinite(repetition_rate))
        throw std::invalid_argument("repetition_rate must be positive");
    if (qber_window == 0 || qber_window > pulses)
        throw std::invalid_argument("qber_window must lie in [1, pulses]");
    if (threads < 1)
        throw std::invalid_argument("threads must be >= 1");
    if (!(drift.sigma >= 0.0) || !std::isfinite(drift.sigma))
        throw std::invalid_argument("drift.sigma must be >= 0");
    modulator.validate();
    optics.validate();
    decoy.validate();
    if (attack) {
        attack->remap.validate();
        attack->strategy.validate();
    }
    for (const ReplayEntry& e : replay) {
        if (e.symbol.bit > 1 || e.symbol.basis > 1)
            throw std::invalid_argument("replay symbols must use bits/bases 0|1");
        if (e.intensity && !decoy.find(*e.intensity))
            throw std::invalid_argument(
                "replay names an intensity class missing from the decoy plan");
    }
    if (const auto objection = scenario_objection(*this))
        throw std::invalid_argument(*objection);
}

std::optional<std::string> scenario_objection(const SimConfig& config) {
    if (config.attack)
        return remap_scenario_objection(config.modulator);
    return std::nullopt;
}

namespace {

// Windowed tallies shared by the streaming run and summarize().
class SummaryAccumulator {
public:
    SummaryAccumulator(std::uint64_t pulses, std::uint64_t window)
        : window_(window),
          window_sifted_((pulses + window - 1) / window, 0),
          window_errors_(window_sifted_.size(), 0) {}

    void add(const PulseRecord& r) {
        ++sent_;
        IntensityTally& tally = intensity_[r.intensity.label];
        ++tally.sent;
        if (!r.detected()) return;
        ++detected_;
        ++tally.detected;
        if (!r.sifted()) return;
        const bool error = decoded_bit(r.outcome.port) != r.alice.bit;
        ++sifted_;
        ++tally.sifted;
        const std::size_t w = static_cast<std::size_t>(r.index / window_);
        ++window_sifted_[w];
        if (error) {
            ++errors_;
            ++tally.errors;
            ++window_errors_[w];
        }
    }

    RunSummary finish() const {
        RunSummary summary;
        summary.total_sent = sent_;
        summary.total_detected = detected_;
        summary.sift_fraction =
            detected_ ? static_cast<double>(sifted_) / detected_ : 0.0;
        summary.no_detections = detected_ == 0;
        if (sifted_ > 0)
            summary.overall = make_estimate(sifted_, errors_);
        else
            summary.overall = QberEstimate{};
        if (!summary.no_detections) {
            for (std::size_t w = 0; w < window_sifted_.size(); ++w) {
                WindowQber wq;
                wq.window_index = w;
                wq.first_pulse = w * window_;
                wq.estimate = window_sifted_[w]
                                  ? make_estimate(window_sifted_[w],
                                                  window_errors_[w])
                                  : QberEstimate{};
                summary.qber_series.push_back(wq);
            }
        }
        for (const auto& [label, tally] : intensity_) {
            IntensityStats stats;
            stats.sent = tally.sent;
            stats.detected = tally.detected;
            stats.gain =
                tally.sent ? static_cast<double>(tally.detected) / tally.sent : 0.0;
            if (tally.sifted)
                stats.qber = make_estimate(tally.sifted, tally.errors);
            summary.per_intensity[label] = stats;
        }
        return summary;
    }

private:
    static QberEstimate make_estimate(std::uint64_t sifted, std::uint64_t errors) {
        QberEstimate est;
        est.sifted_count = sifted;
        est.error_count = errors;
        const double n = static_cast<double>(sifted);
        est.qber = static_cast<double>(errors) / n;
        est.std_error = std::sqrt(est.qber * (1.0 - est.qber) / n);
        return est;
    }

    struct IntensityTally {
        std::uint64_t sent = 0, detected = 0, sifted = 0, errors = 0;
    };

    std::uint64_t window_;
    std::uint64_t sent_ = 0, detected_ = 0, sifted_ = 0, errors_ = 0;
    std::vector<std::uint64_t> window_sifted_;
    std::vector<std::uint64_t> window_errors_;
    std::map<IntensityLabel, IntensityTally> intensity_;
};

// Everything one pulse needs besides its own random stream.
struct PulseContext {
    const SimConfig* config;
    double dt;
};

PulseRecord simulate_pulse(const PulseContext& ctx, std::uint64_t index,
                           double drift_offset) {
    const SimConfig& cfg = *ctx.config;
    PulseRng rng(cfg.master_seed, pulse_stream(index, kProtocolLane));

    PulseRecord record;
    record.index = index;
    record.time = static_cast<double>(index) / cfg.repetition_rate;

    const ReplayEntry* replayed =
        cfg.replay.empty() ? nullptr : &cfg.replay[index % cfg.replay.size()];
    if (replayed) {
        record.alice = replayed->symbol;
    } else {
        record.alice.bit = static_cast<std::uint8_t>(rng.next_below(2));
        record.alice.basis = static_cast<std::uint8_t>(rng.next_below(2));
    }

    if (replayed && replayed->intensity) {
        const DecoyPlan::Entry* entry = cfg.decoy.find(*replayed->intensity);
        record.intensity = {entry->label, entry->mean_photon_number};
    } else {
        record.intensity = assign_intensity(rng, cfg.decoy);
    }

    record.bob_basis =
        cfg.mode == RunMode::full
            ? static_cast<std::uint8_t>(rng.next_below(2))
            : static_cast<std::uint8_t>(kSimplifiedReceiverBasis);
    const PhaseShift receiver_phase = bob_phase(record.bob_basis);

    if (cfg.attack) {
        record.eve_touched = true;
        const AttackConfig& attack = *cfg.attack;
        // The injected pulse picked up the remapped phase at the sender.
        const double remapped =
            record.alice.phase_index() * attack.remap.delta;

        std::size_t pick = 0;
        if (attack.strategy.measurements.size() > 1) {
            const double u = rng.next_unit();
            double cumulative = 0.0;
            for (std::size_t j = 0; j < attack.strategy.measurements.size(); ++j) {
                cumulative += attack.strategy.measurements[j].probability;
                pick = j;
                if (u < cumulative) break;
            }
        }
        const EveMeasurement& meas = attack.strategy.measurements[pick];
        const double c = std::cos((remapped - meas.analyzer_angle) / 2.0);
        const int outcome = rng.next_unit() < c * c ? 0 : 1;
        const OutcomeRule& rule = meas.outcomes[outcome];
        if (rule.action == EveAction::vacuum) {
            record.outcome = measure(PhaseShift(0.0), receiver_phase, 0.0,
                                     drift_offset, cfg.optics, rng);
        } else {
            const PhaseShift resent(rule.resend_symbol * (kPi / 2.0));
            record.outcome =
                measure(resent, receiver_phase, record.intensity.mean_photon_number,
                        drift_offset, cfg.optics, rng);
        }
        return record;
    }

    record.outcome = measure(encode_phase(record.alice), receiver_phase,
                             record.intensity.mean_photon_number, drift_offset,
                             cfg.optics, rng);
    return record;
}

} // namespace

RunSummary run_protocol_streamed(const SimConfig& config, const RecordSink& sink) {
    config.validate();

    const PulseContext ctx{&config, 1.0 / config.repetition_rate};
    SummaryAccumulator accumulator(config.pulses, config.qber_window);

    constexpr std::uint64_t kChunk = 1 << 16;
    std::vector<double> offsets(static_cast<std::size_t>(
        std::min<std::uint64_t>(kChunk, config.pulses)));
    std::vector<PulseRecord> chunk(offsets.size());

    DriftState drift{};
    for (std::uint64_t start = 0; start < config.pulses; start += kChunk) {
        const std::size_t count = static_cast<std::size_t>(
            std::min<std::uint64_t>(kChunk, config.pulses - start));

        // The drift walk is sequential by pulse index; its increments come
        // from each pulse's own stream, so the result does not depend on how
        // the measurement pass below is threaded.
        for (std::size_t i = 0; i < count; ++i) {
            PulseRng rng(config.master_seed,
                         pulse_stream(start + i, kDriftLane));
            drift = drift_step(drift, config.drift, ctx.dt, rng);
            offsets[i] = drift.phase_offset;
        }

        const int workers = static_cast<int>(
            std::min<std::uint64_t>(config.threads, count));
        if (workers <= 1) {
            for (std::size_t i = 0; i < count; ++i)
                chunk[i] = simulate_pulse(ctx, start + i, offsets[i]);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (std::size_t i = w; i < count; i += workers)
                        chunk[i] = simulate_pulse(ctx, start + i, offsets[i]);
                });
            }
            for (std::thread& t : pool) t.join();
        }

        for (std::size_t i = 0; i < count; ++i) {
            accumulator.add(chunk[i]);
            if (sink) sink(chunk[i]);
        }
    }
    return accumulator.finish();
}

std::pair<std::vector<PulseRecord>, RunSummary>
run_protocol(const SimConfig& config) {
    std::vector<PulseRecord> records;
    records.reserve(config.pulses);
    RunSummary summary = run_protocol_streamed(
        config, [&records](const PulseRecord& r) { records.push_back(r); });
    return {std::move(records), std::move(summary)};
}

RunSummary summarize(std::span<const PulseRecord> records,
                     std::uint64_t qber_window) {
    if (qber_window == 0)
        throw std::invalid_argument("qber_window must be positive");
    std::uint64_t max_index = 0;
    for (const PulseRecord& r : records) max_index = std::max(max_index, r.index);
    SummaryAccumulator accumulator(records.empty() ? 1 : max_index + 1,
                                   qber_window);
    for (const PulseRecord& r : records) accumulator.add(r);
    return accumulator.finish();
}

} // namespace sagnac
