#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "sagnac/attacks.hpp"
#include "sagnac/config.hpp"
#include "sagnac/sim.hpp"

namespace sagnac {

/// Column contract of the records CSV; header always present.
inline constexpr const char* kRecordsCsvHeader =
    "index,time_s,alice_bit,alice_basis,intensity,bob_basis,outcome,"
    "eve_touched,sifted,error";

void write_records_csv_header(std::ostream& out);
void append_record_csv(std::ostream& out, const PulseRecord& record);

/// `key: value` summary document with a windowed QBER series and
/// per-intensity sections.
void write_summary_report(std::ostream& out, const SimConfig& config,
                          const RunSummary& summary);

struct AttackReport {
    bool applicable = true;
    std::string objection;
    double delta = 0.0;
    bool optimized = false;
    AttackResult exact;
    EveStrategy strategy;
    std::optional<QberEstimate> replay; // Monte Carlo check of the pulse loop
    std::uint64_t replay_pulses = 0;
};

void write_attack_report(std::ostream& out, const AttackReport& report);

struct DesignRow {
    const char* phase_label;
    double target_phase;
    double exact_frequency;
    double quantized_frequency;
    double residual_phase;
};

void write_design_csv(std::ostream& out, const ModulatorConfig& modulator,
                      std::span<const DesignRow> rows);
void write_design_report(std::ostream& out, const ModulatorConfig& modulator,
                         std::span<const DesignRow> rows);

std::string format_double(double value);

} // namespace sagnac
