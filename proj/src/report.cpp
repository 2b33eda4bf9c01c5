#include "sagnac/report.hpp"

#include <cstdio>
#include <ostream>

namespace sagnac {

namespace {

const char* outcome_string(const MeasureOutcome& outcome) {
    switch (outcome.port) {
    case Port::none: return "none";
    case Port::ch1: return outcome.double_click ? "ch1*" : "ch1";
    case Port::ch2: return outcome.double_click ? "ch2*" : "ch2";
    }
    return "?";
}

std::string format_time(double seconds) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", seconds);
    return buf;
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

void write_records_csv_header(std::ostream& out) {
    out << kRecordsCsvHeader << '\n';
}

void append_record_csv(std::ostream& out, const PulseRecord& r) {
    const bool sifted = r.sifted();
    const bool error = sifted && decoded_bit(r.outcome.port) != r.alice.bit;
    out << r.index << ',' << format_time(r.time) << ',' << int(r.alice.bit)
        << ',' << int(r.alice.basis) << ',' << to_string(r.intensity.label)
        << ',' << int(r.bob_basis) << ',' << outcome_string(r.outcome) << ','
        << int(r.eve_touched) << ',' << int(sifted) << ',' << int(error)
        << '\n';
}

void write_summary_report(std::ostream& out, const SimConfig& config,
                          const RunSummary& summary) {
    out << "format: sagnac-qkd-summary/1\n";
    out << "mode: "
        << (config.mode == RunMode::simplified ? "simplified" : "full") << '\n';
    out << "pulses: " << config.pulses << '\n';
    out << "repetition_rate: " << format_double(config.repetition_rate) << '\n';
    out << "master_seed: " << config.master_seed << '\n';
    out << "qber_window: " << config.qber_window << '\n';
    out << "attack_enabled: " << int(config.attack.has_value()) << '\n';
    out << "total_sent: " << summary.total_sent << '\n';
    out << "total_detected: " << summary.total_detected << '\n';
    out << "sift_fraction: " << format_double(summary.sift_fraction) << '\n';
    out << "sifted_count: " << summary.overall.sifted_count << '\n';
    out << "error_count: " << summary.overall.error_count << '\n';
    out << "qber: " << format_double(summary.overall.qber) << '\n';
    out << "qber_std_error: " << format_double(summary.overall.std_error) << '\n';
    out << "no_detections_warning: " << int(summary.no_detections) << '\n';

    out << "[qber_series]\n";
    out << "window,first_pulse,sifted,errors,qber,std_error\n";
    for (const WindowQber& w : summary.qber_series) {
        out << w.window_index << ',' << w.first_pulse << ','
            << w.estimate.sifted_count << ',' << w.estimate.error_count << ','
            << format_double(w.estimate.qber) << ','
            << format_double(w.estimate.std_error) << '\n';
    }

    out << "[per_intensity]\n";
    out << "label,sent,detected,gain,sifted,errors,qber,std_error\n";
    for (const auto& [label, stats] : summary.per_intensity) {
        out << to_string(label) << ',' << stats.sent << ',' << stats.detected
            << ',' << format_double(stats.gain) << ',' << stats.qber.sifted_count
            << ',' << stats.qber.error_count << ','
            << format_double(stats.qber.qber) << ','
            << format_double(stats.qber.std_error) << '\n';
    }
}

void write_attack_report(std::ostream& out, const AttackReport& report) {
    out << "format: sagnac-qkd-attack/1\n";
    out << "applicable: " << int(report.applicable) << '\n';
    if (!report.applicable) {
        out << "objection: " << report.objection << '\n';
        return;
    }
    out << "delta: " << format_double(report.delta) << '\n';
    out << "optimized: " << int(report.optimized) << '\n';
    out << "exact_qber: " << format_double(report.exact.qber) << '\n';
    out << "eve_information: " << format_double(report.exact.eve_information)
        << '\n';
    out << "detection_suppression: "
        << format_double(report.exact.detection_suppression) << '\n';
    out << "security: " << to_string(security_margin(report.exact.qber)) << '\n';
    out << "secure_bound: " << format_double(kBb84SecureQberBound) << '\n';
    out << "replay_pulses: " << report.replay_pulses << '\n';
    if (report.replay) {
        out << "replay_sifted: " << report.replay->sifted_count << '\n';
        out << "replay_qber: " << format_double(report.replay->qber) << '\n';
        out << "replay_std_error: " << format_double(report.replay->std_error)
            << '\n';
    }

    out << "[strategy]\n";
    out << "measurement,analyzer_angle,probability,outcome,action,"
           "resend_symbol,guess_bit,guess_basis\n";
    for (std::size_t m = 0; m < report.strategy.measurements.size(); ++m) {
        const EveMeasurement& meas = report.strategy.measurements[m];
        for (int o = 0; o < 2; ++o) {
            const OutcomeRule& rule = meas.outcomes[o];
            out << m << ',' << format_double(meas.analyzer_angle) << ','
                << format_double(meas.probability) << ',' << o << ',';
            if (rule.action == EveAction::vacuum) {
                out << "vacuum,,,\n";
            } else {
                out << "resend," << int(rule.resend_symbol) << ','
                    << int(rule.guess_bit) << ',' << int(rule.guess_basis)
                    << '\n';
            }
        }
    }

    out << "[per_symbol]\n";
    out << "symbol,bit,basis,sent_weight,suppressed_weight,sifted_weight,"
           "error_weight\n";
    for (int k = 0; k < 4; ++k) {
        const SymbolBreakdown& row = report.exact.per_symbol[k];
        const Bb84Symbol symbol = Bb84Symbol::from_phase_index(k);
        out << k << ',' << int(symbol.bit) << ',' << int(symbol.basis) << ','
            << format_double(row.sent_weight) << ','
            << format_double(row.suppressed_weight) << ','
            << format_double(row.sifted_weight) << ','
            << format_double(row.error_weight) << '\n';
    }
}

void write_design_csv(std::ostream& out, const ModulatorConfig& modulator,
                      std::span<const DesignRow> rows) {
    out << "phase,target_phase_rad,frequency_hz,quantized_frequency_hz,"
           "residual_phase_rad\n";
    (void)modulator;
    for (const DesignRow& row : rows) {
        out << row.phase_label << ',' << format_double(row.target_phase) << ','
            << format_double(row.exact_frequency) << ','
            << format_double(row.quantized_frequency) << ','
            << format_double(row.residual_phase) << '\n';
    }
}

void write_design_report(std::ostream& out, const ModulatorConfig& modulator,
                         std::span<const DesignRow> rows) {
    out << "format: sagnac-qkd-design/1\n";
    out << "effective_index: " << format_double(modulator.effective_index)
        << '\n';
    out << "delay_length_m: " << format_double(modulator.delay_length) << '\n';
    out << "paired_aoms: " << int(modulator.paired_aoms) << '\n';
    out << "base_frequency_hz: " << format_double(modulator.base_frequency)
        << '\n';
    out << "frequency_resolution_hz: "
        << format_double(modulator.frequency_resolution) << '\n';
    out << "[table]\n";
    out << "phase,target_phase_rad,frequency_hz,quantized_frequency_hz,"
           "residual_phase_rad\n";
    for (const DesignRow& row : rows) {
        out << row.phase_label << ',' << format_double(row.target_phase) << ','
            << format_double(row.exact_frequency) << ','
            << format_double(row.quantized_frequency) << ','
            << format_double(row.residual_phase) << '\n';
    }
}

} // namespace sagnac
