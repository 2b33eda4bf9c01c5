#include "sagnac/commands.hpp"

#include <array>
#include <fstream>
#include <iostream>
#include <vector>

#include "CLI11.hpp"

#include "sagnac/config.hpp"
#include "sagnac/report.hpp"

namespace sagnac {

namespace {

Scenario load_scenario(const CommandOptions& options) {
    Scenario scenario;
    if (!options.config_path.empty())
        scenario = parse_config(options.config_path);
    if (options.seed) scenario.sim.master_seed = *options.seed;
    if (options.threads) {
        if (*options.threads < 1)
            throw ConfigError("threads override must be >= 1");
        scenario.sim.threads = *options.threads;
    }
    if (options.format != "csv" && options.format != "report")
        throw ConfigError("format must be csv or report");
    return scenario;
}

std::ofstream open_output(const std::filesystem::path& dir,
                          const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
}

void write_effective_config(const CommandOptions& options,
                            const Scenario& scenario) {
    std::ofstream out = open_output(options.out_dir, "effective_config.json");
    out << effective_config_text(scenario);
}

/// Resolve an attack request into a concrete remap + strategy.
struct ResolvedAttack {
    AttackConfig config;
    bool optimized = false;
};

ResolvedAttack resolve_attack(const AttackRequest& request,
                              const Scenario& scenario) {
    ResolvedAttack resolved;
    switch (request.kind) {
    case AttackRequest::Kind::canonical:
        resolved.config.remap.delta =
            resolve_attack_delta(request, scenario.sim.modulator);
        resolved.config.strategy = EveStrategy::canonical_intercept_resend();
        break;
    case AttackRequest::Kind::table:
        resolved.config.remap.delta =
            resolve_attack_delta(request, scenario.sim.modulator);
        resolved.config.strategy = request.table;
        break;
    case AttackRequest::Kind::optimal: {
        OptimizedAttack best;
        if (request.delta || request.eve_fiber_delta) {
            best = optimize_attack_at_delta(
                resolve_attack_delta(request, scenario.sim.modulator),
                scenario.sim.optics);
        } else {
            best = optimize_attack(request.bounds, scenario.sim.optics);
        }
        resolved.config.remap = best.remap;
        resolved.config.strategy = best.strategy;
        resolved.optimized = true;
        break;
    }
    }
    return resolved;
}

// Closed-form matched-basis QBER for a drift-free run, composed from the
// optics building blocks; sweep rows print it next to the Monte Carlo value.
double analytic_sifted_qber(const OpticsConfig& optics) {
    const double mu_at_detectors =
        optics.mean_photon_number * optics.transmittance();
    const ArmProbabilities arms =
        arm_probabilities(PhaseShift(0.0), optics.visibility);
    const double p_wrong =
        click_probability(mu_at_detectors, optics.detector_efficiency,
                          optics.dark_count_prob, arms.ch1);
    const double p_right =
        click_probability(mu_at_detectors, optics.detector_efficiency,
                          optics.dark_count_prob, arms.ch2);
    const double p_detect = 1.0 - (1.0 - p_wrong) * (1.0 - p_right);
    const double p_error = p_wrong * (1.0 - p_right) + 0.5 * p_wrong * p_right;
    return p_error / p_detect;
}

struct SweepRow {
    double value = 0.0;
    double analytic_qber = 0.0;
    double simulated_qber = 0.0;
    double std_error = 0.0;
    std::uint64_t detected = 0;
    std::uint64_t sifted = 0;
};

} // namespace

int cmd_design(const CommandOptions& options) {
    const Scenario scenario = load_scenario(options);
    const ModulatorConfig& modulator = scenario.sim.modulator;
    modulator.validate();

    static constexpr std::array<const char*, 4> kLabels = {"0", "pi/2", "pi",
                                                           "3pi/2"};
    const double k = modulator.phase_per_hertz();
    std::array<DesignRow, 4> rows;
    for (int i = 0; i < 4; ++i) {
        const PhaseShift target(i * (kPi / 2.0));
        const double quantized = frequency_for_phase(target, modulator);
        rows[i] = {kLabels[i], target.radians(),
                   modulator.base_frequency + target.radians() / k, quantized,
                   wrap_to_pm_pi(k * (quantized - modulator.base_frequency) -
                                 target.radians())};
    }

    write_effective_config(options, scenario);
    if (options.format == "csv") {
        std::ofstream out = open_output(options.out_dir, "design.csv");
        write_design_csv(out, modulator, rows);
    } else {
        std::ofstream out = open_output(options.out_dir, "design.txt");
        write_design_report(out, modulator, rows);
    }
    return kExitOk;
}

int cmd_simulate(const CommandOptions& options) {
    Scenario scenario = load_scenario(options);
    if (scenario.attack) {
        const ResolvedAttack resolved = resolve_attack(*scenario.attack, scenario);
        scenario.sim.attack = resolved.config;
    }
    scenario.sim.validate();

    write_effective_config(options, scenario);
    std::ofstream records = open_output(options.out_dir, "records.csv");
    write_records_csv_header(records);
    const RunSummary summary = run_protocol_streamed(
        scenario.sim,
        [&records](const PulseRecord& r) { append_record_csv(records, r); });
    records.flush();
    if (!records)
        throw std::runtime_error("failed while streaming records.csv");
    if (summary.no_detections)
        std::cerr << "warning: no detections in this run; QBER series empty\n";

    std::ofstream report = open_output(options.out_dir, "summary.txt");
    write_summary_report(report, scenario.sim, summary);
    return kExitOk;
}

int cmd_attack(const CommandOptions& options) {
    Scenario scenario = load_scenario(options);
    if (!scenario.attack) {
        // The subcommand exists to study the attack; default to optimizing.
        scenario.attack = AttackRequest{};
    }

    AttackReport report;
    if (const auto objection = remap_scenario_objection(scenario.sim.modulator)) {
        report.applicable = false;
        report.objection = *objection;
        write_effective_config(options, scenario);
        std::ofstream out = open_output(options.out_dir, "attack_report.txt");
        write_attack_report(out, report);
        return kExitOk;
    }

    const ResolvedAttack resolved = resolve_attack(*scenario.attack, scenario);
    report.delta = resolved.config.remap.delta;
    report.optimized = resolved.optimized;
    report.strategy = resolved.config.strategy;
    report.exact = evaluate_attack(resolved.config.strategy,
                                   resolved.config.remap, scenario.sim.optics);

    // Monte Carlo replay through the pulse loop.
    scenario.sim.attack = resolved.config;
    scenario.sim.validate();
    report.replay_pulses = scenario.sim.pulses;
    const RunSummary replay = run_protocol_streamed(scenario.sim, nullptr);
    if (replay.overall.sifted_count > 0) report.replay = replay.overall;

    write_effective_config(options, scenario);
    std::ofstream out = open_output(options.out_dir, "attack_report.txt");
    write_attack_report(out, report);
    return kExitOk;
}

int cmd_sweep(const CommandOptions& options) {
    Scenario scenario = load_scenario(options);

    // Flags override the config's sweep section; the resolved spec goes into
    // the echo so the sweep reruns without flags.
    SweepSpec spec = scenario.sweep.value_or(SweepSpec{});
    if (options.axis) spec.axis = *options.axis;
    if (options.points) spec.points = *options.points;
    if (options.axis_min) spec.min = *options.axis_min;
    if (options.axis_max) spec.max = *options.axis_max;
    if (spec.points < 1) throw ConfigError("sweep needs at least one point");

    double lo, hi;
    if (spec.axis == "visibility") {
        lo = spec.min.value_or(0.90);
        hi = spec.max.value_or(0.99);
        if (lo < 0.0 || hi > 1.0)
            throw ConfigError("visibility range outside [0, 1]");
    } else if (spec.axis == "distance") {
        lo = spec.min.value_or(10.0);
        hi = spec.max.value_or(40.0);
        if (lo < 0.0) throw ConfigError("distance range must be >= 0 km");
    } else if (spec.axis == "delta") {
        lo = spec.min.value_or(0.05);
        hi = spec.max.value_or(kPi / 2.0);
        if (!(lo > 0.0) || hi > kPi / 2.0)
            throw ConfigError("delta range must lie in (0, pi/2]");
    } else {
        throw ConfigError("sweep axis must be visibility, distance or delta");
    }
    if (lo > hi) throw ConfigError("sweep range is empty (min > max)");
    spec.min = lo;
    spec.max = hi;
    scenario.sweep = spec;

    std::vector<SweepRow> rows;
    for (int i = 0; i < spec.points; ++i) {
        const double value =
            spec.points == 1
                ? lo
                : lo + (hi - lo) * static_cast<double>(i) / (spec.points - 1);
        SimConfig point = scenario.sim;
        point.master_seed =
            scenario.sim.master_seed + static_cast<std::uint64_t>(i);

        SweepRow row;
        row.value = value;
        if (spec.axis == "visibility") {
            point.optics.visibility = value;
            row.analytic_qber = qber_from_visibility(value);
        } else if (spec.axis == "distance") {
            point.optics.loop_length = value;
            row.analytic_qber = analytic_sifted_qber(point.optics);
        } else {
            const OptimizedAttack best =
                optimize_attack_at_delta(value, point.optics);
            point.attack = AttackConfig{best.remap, best.strategy};
            row.analytic_qber = best.result.qber;
        }
        point.validate();

        const RunSummary summary = run_protocol_streamed(point, nullptr);
        row.detected = summary.total_detected;
        row.sifted = summary.overall.sifted_count;
        row.simulated_qber = summary.overall.qber;
        row.std_error = summary.overall.std_error;
        rows.push_back(row);
    }

    write_effective_config(options, scenario);
    std::ofstream out = open_output(options.out_dir, "sweep.csv");
    out << "axis,value,analytic_qber,simulated_qber,std_error,detected,sifted\n";
    for (const SweepRow& row : rows) {
        out << spec.axis << ',' << format_double(row.value) << ','
            << format_double(row.analytic_qber) << ','
            << format_double(row.simulated_qber) << ','
            << format_double(row.std_error) << ',' << row.detected << ','
            << row.sifted << '\n';
    }
    return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Sagnac-loop BB84 simulator and AOM frequency-plan designer"};
    app.require_subcommand(1);

    CommandOptions options;
    const auto add_common = [&options](CLI::App* cmd) {
        cmd->add_option("--config", options.config_path,
                        "scenario file (JSON); defaults apply when omitted");
        cmd->add_option("--out", options.out_dir, "output directory");
        cmd->add_option("--seed", options.seed, "master seed override");
        cmd->add_option("--threads", options.threads, "worker thread override");
        cmd->add_option("--format", options.format, "csv or report");
    };

    CLI::App* design =
        app.add_subcommand("design", "emit the BB84 drive-frequency table");
    add_common(design);
    CLI::App* simulate =
        app.add_subcommand("simulate", "run the pulse loop, write records + summary");
    add_common(simulate);
    CLI::App* attack =
        app.add_subcommand("attack", "evaluate/optimize the phase-remapping attack");
    add_common(attack);
    CLI::App* sweep = app.add_subcommand("sweep", "sweep one axis, write a CSV");
    add_common(sweep);
    sweep->add_option("--axis", options.axis, "visibility | distance | delta");
    sweep->add_option("--points", options.points, "number of sweep points");
    sweep->add_option("--min", options.axis_min, "axis lower bound");
    sweep->add_option("--max", options.axis_max, "axis upper bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (design->parsed()) return cmd_design(options);
        if (simulate->parsed()) return cmd_simulate(options);
        if (attack->parsed()) return cmd_attack(options);
        if (sweep->parsed()) return cmd_sweep(options);
        std::cerr << "no subcommand given\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace sagnac
