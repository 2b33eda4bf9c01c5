#include "sagnac/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace sagnac {

PhaseShift encode_phase(Bb84Symbol symbol) {
    if (symbol.bit > 1 || symbol.basis > 1)
        throw std::invalid_argument("BB84 symbol bit and basis must be 0 or 1");
    return PhaseShift(symbol.phase_index() * (kPi / 2.0));
}

PhaseShift bob_phase(int basis) {
    if (basis != 0 && basis != 1)
        throw std::invalid_argument("measurement basis must be 0 or 1");
    return PhaseShift(basis * (kPi / 2.0));
}

int decoded_bit(Port port) {
    switch (port) {
    case Port::ch2: return 0;
    case Port::ch1: return 1;
    default: throw std::invalid_argument("no click to decode");
    }
}

MeasureOutcome measure(PhaseShift alice_phase, PhaseShift bob_phase,
                       double mean_photon_number, double drift_offset,
                       const OpticsConfig& optics, PulseRng& rng) {
    optics.validate();
    const PhaseShift delta(alice_phase.radians() - bob_phase.radians() +
                           drift_offset);
    const ArmProbabilities arms = arm_probabilities(delta, optics.visibility);
    const double mu_at_detectors =
        mean_photon_number * optics.transmittance();
    const DetectorClickProbabilities clicks =
        click_probabilities(mu_at_detectors, optics.detector_efficiency,
                            optics.dark_count_prob, arms);

    const bool ch1 = rng.next_unit() < clicks.ch1;
    const bool ch2 = rng.next_unit() < clicks.ch2;
    if (ch1 && ch2) // squash a double click with a fair coin
        return {rng.next_bool() ? Port::ch1 : Port::ch2, true};
    if (ch1) return {Port::ch1, false};
    if (ch2) return {Port::ch2, false};
    return {Port::none, false};
}

MeasureOutcome measure(PhaseShift alice_phase, PhaseShift bob_phase,
                       const OpticsConfig& optics, PulseRng& rng) {
    return measure(alice_phase, bob_phase, optics.mean_photon_number, 0.0,
                   optics, rng);
}

const char* to_string(IntensityLabel label) {
    switch (label) {
    case IntensityLabel::signal: return "signal";
    case IntensityLabel::decoy: return "decoy";
    case IntensityLabel::vacuum: return "vacuum";
    }
    return "?";
}

DecoyPlan DecoyPlan::signal_only(double mean_photon_number) {
    DecoyPlan plan;
    plan.entries.push_back({IntensityLabel::signal, mean_photon_number, 1.0});
    return plan;
}

void DecoyPlan::validate() const {
    if (entries.empty())
        throw std::invalid_argument("decoy plan must list at least one class");
    double total = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& e = entries[i];
        if (!std::isfinite(e.probability) || e.probability < 0.0)
            throw std::invalid_argument("decoy class probability must be >= 0");
        if (!std::isfinite(e.mean_photon_number) || e.mean_photon_number < 0.0)
            throw std::invalid_argument("decoy class photon number must be >= 0");
        for (std::size_t j = 0; j < i; ++j)
            if (entries[j].label == e.label)
                throw std::invalid_argument("decoy plan repeats a class label");
        total += e.probability;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("decoy class probabilities must sum to 1");
}

const DecoyPlan::Entry* DecoyPlan::find(IntensityLabel label) const {
    for (const Entry& e : entries)
        if (e.label == label) return &e;
    return nullptr;
}

IntensityClass assign_intensity(PulseRng& rng, const DecoyPlan& plan) {
    plan.validate();
    if (plan.entries.size() == 1) {
        const DecoyPlan::Entry& e = plan.entries.front();
        return {e.label, e.mean_photon_number};
    }
    const double u = rng.next_unit();
    double cumulative = 0.0;
    for (const DecoyPlan::Entry& e : plan.entries) {
        cumulative += e.probability;
        if (u < cumulative) return {e.label, e.mean_photon_number};
    }
    const DecoyPlan::Entry& last = plan.entries.back();
    return {last.label, last.mean_photon_number};
}

std::vector<BitPair> sift(std::span<const PulseRecord> records) {
    std::vector<BitPair> pairs;
    pairs.reserve(records.size() / 2);
    for (const PulseRecord& r : records) {
        if (!r.sifted()) continue;
        pairs.push_back({r.alice.bit,
                         static_cast<std::uint8_t>(decoded_bit(r.outcome.port))});
    }
    return pairs;
}

QberEstimate estimate_qber(std::span<const BitPair> sifted) {
    if (sifted.empty())
        throw std::invalid_argument("cannot estimate QBER without sifted bits");
    QberEstimate est;
    est.sifted_count = sifted.size();
    for (const BitPair& p : sifted)
        if (p.alice != p.bob) ++est.error_count;
    const double n = static_cast<double>(est.sifted_count);
    est.qber = static_cast<double>(est.error_count) / n;
    est.std_error = std::sqrt(est.qber * (1.0 - est.qber) / n);
    return est;
}

std::map<IntensityLabel, IntensityStats>
per_intensity_stats(std::span<const PulseRecord> records) {
    std::map<IntensityLabel, IntensityStats> stats;
    std::map<IntensityLabel, std::vector<BitPair>> sifted;
    for (const PulseRecord& r : records) {
        IntensityStats& s = stats[r.intensity.label];
        ++s.sent;
        if (r.detected()) ++s.detected;
        if (r.sifted())
            sifted[r.intensity.label].push_back(
                {r.alice.bit,
                 static_cast<std::uint8_t>(decoded_bit(r.outcome.port))});
    }
    for (auto& [label, s] : stats) {
        s.gain = s.sent ? static_cast<double>(s.detected) / s.sent : 0.0;
        const auto it = sifted.find(label);
        if (it != sifted.end() && !it->second.empty())
            s.qber = estimate_qber(it->second);
    }
    return stats;
}

} // namespace sagnac
