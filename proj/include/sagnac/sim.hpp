#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sagnac/attacks.hpp"
#include "sagnac/optics.hpp"
#include "sagnac/protocol.hpp"
#include "sagnac/rng.hpp"

namespace sagnac {

enum class RunMode : std::uint8_t { simplified, full };

/// The preliminary setup modulates only the sender; the receiver stays in
/// one basis.
inline constexpr int kSimplifiedReceiverBasis = 0;

struct DriftConfig {
    bool enabled = true;
    double sigma = 6.0e-3; // rad per sqrt(second), Wiener walk of the loop phase
};

struct DriftState {
    double phase_offset = 0.0;
    double elapsed = 0.0; // seconds
};

/// Advance the phase random walk by dt: offset += N(0, sigma^2 * dt).
DriftState drift_step(DriftState state, const DriftConfig& config, double dt,
                      PulseRng& rng);

struct AttackConfig {
    RemapConfig remap;
    EveStrategy strategy;
};

struct ReplayEntry {
    Bb84Symbol symbol;
    std::optional<IntensityLabel> intensity;
};

struct SimConfig {
    std::uint64_t pulses = 100000;
    double repetition_rate = 1000.0; // Hz
    RunMode mode = RunMode::simplified;
    ModulatorConfig modulator;
    OpticsConfig optics;
    DecoyPlan decoy = DecoyPlan::signal_only(0.8);
    DriftConfig drift;
    std::optional<AttackConfig> attack;
    std::uint64_t master_seed = 42;
    std::uint64_t qber_window = 10000; // pulses per QBER time bin
    int threads = 1;
    bool trojan_monitored = true; // watchdog photodiodes on the sender's port
    std::vector<ReplayEntry> replay; // preloaded symbol sequence, cycled

    void validate() const;
};

struct WindowQber {
    std::uint64_t window_index = 0;
    std::uint64_t first_pulse = 0;
    QberEstimate estimate;
};

struct RunSummary {
    std::uint64_t total_sent = 0;
    std::uint64_t total_detected = 0;
    double sift_fraction = 0.0; // sifted / detected
    QberEstimate overall;
    std::vector<WindowQber> qber_series;
    std::map<IntensityLabel, IntensityStats> per_intensity;
    bool no_detections = false;

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

inline bool operator==(const QberEstimate& a, const QberEstimate& b) {
    return a.qber == b.qber && a.std_error == b.std_error &&
           a.sifted_count == b.sifted_count && a.error_count == b.error_count;
}
inline bool operator==(const WindowQber& a, const WindowQber& b) {
    return a.window_index == b.window_index && a.first_pulse == b.first_pulse &&
           a.estimate == b.estimate;
}
inline bool operator==(const IntensityStats& a, const IntensityStats& b) {
    return a.sent == b.sent && a.detected == b.detected && a.gain == b.gain &&
           a.qber == b.qber;
}

using RecordSink = std::function<void(const PulseRecord&)>;

/// Run the pulse loop, handing each record to `sink` in index order.
/// Deterministic for a given config: per-pulse draws come from counter
/// streams keyed on the pulse index, so the thread count cannot change any
/// outcome.
RunSummary run_protocol_streamed(const SimConfig& config, const RecordSink& sink);

/// Convenience wrapper that keeps all records in memory.
std::pair<std::vector<PulseRecord>, RunSummary>
run_protocol(const SimConfig& config);

/// Rebuild a summary from records, windowing the sifted stream by pulse
/// index.
RunSummary summarize(std::span<const PulseRecord> records,
                     std::uint64_t qber_window);

/// Validation message for scenarios that cannot run as configured, e.g. a
/// remapping attack against a paired-AOM modulator.
std::optional<std::string> scenario_objection(const SimConfig& config);

} // namespace sagnac
