#include "sagnac/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace sagnac {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + (path.empty() ? "<root>" : path) +
                      ": " + what);
}

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(join(path, item.key()), "unknown key");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const char* key, double fallback,
                  const std::string& path) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) fail(join(path, key), "expected a number");
    return v->get<double>();
}

double get_number_in(const json& obj, const char* key, double fallback,
                     const std::string& path, double lo, double hi,
                     bool lo_open = false, bool hi_open = false) {
    const double v = get_number(obj, key, fallback, path);
    const bool lo_ok = lo_open ? v > lo : v >= lo;
    const bool hi_ok = hi_open ? v < hi : v <= hi;
    if (!std::isfinite(v) || !lo_ok || !hi_ok) {
        std::ostringstream msg;
        msg << "value " << v << " outside " << (lo_open ? "(" : "[") << lo
            << ", " << hi << (hi_open ? ")" : "]");
        fail(join(path, key), msg.str());
    }
    return v;
}

std::uint64_t get_count(const json& obj, const char* key, std::uint64_t fallback,
                        const std::string& path, std::uint64_t lo = 0) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !v->is_number_integer())
        fail(join(path, key), "expected a non-negative integer");
    if (v->is_number_integer() && v->get<std::int64_t>() < 0)
        fail(join(path, key), "expected a non-negative integer");
    const std::uint64_t value = v->get<std::uint64_t>();
    if (value < lo) fail(join(path, key), "value too small");
    return value;
}

bool get_bool(const json& obj, const char* key, bool fallback,
              const std::string& path) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(join(path, key), "expected true or false");
    return v->get<bool>();
}

std::string get_string(const json& obj, const char* key,
                       const std::string& fallback, const std::string& path) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) fail(join(path, key), "expected a string");
    return v->get<std::string>();
}

IntensityLabel parse_label(const std::string& text, const std::string& path) {
    if (text == "signal") return IntensityLabel::signal;
    if (text == "decoy") return IntensityLabel::decoy;
    if (text == "vacuum") return IntensityLabel::vacuum;
    fail(path, "intensity label must be signal, decoy or vacuum");
}

ModulatorConfig parse_modulator(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"effective_index", "delay_length", "paired_aoms",
                "base_frequency", "frequency_resolution"});
    ModulatorConfig m;
    m.effective_index =
        get_number_in(obj, "effective_index", m.effective_index, path, 1.0, 2.0);
    m.delay_length = get_number_in(obj, "delay_length", m.delay_length, path,
                                   0.0, 1e9, /*lo_open=*/true);
    m.paired_aoms = get_bool(obj, "paired_aoms", m.paired_aoms, path);
    m.base_frequency = get_number_in(obj, "base_frequency", m.base_frequency,
                                     path, 0.0, 1e12, /*lo_open=*/true);
    m.frequency_resolution =
        get_number_in(obj, "frequency_resolution", m.frequency_resolution, path,
                      0.0, 1e12, /*lo_open=*/true);
    return m;
}

OpticsConfig parse_optics(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"visibility", "loop_length", "attenuation", "insertion_loss",
                "detector_efficiency", "dark_count_prob", "mean_photon_number"});
    OpticsConfig o;
    o.visibility = get_number_in(obj, "visibility", o.visibility, path, 0.0, 1.0);
    o.loop_length = get_number_in(obj, "loop_length", o.loop_length, path, 0.0, 1e6);
    o.attenuation = get_number_in(obj, "attenuation", o.attenuation, path, 0.0, 1e3);
    o.insertion_loss =
        get_number_in(obj, "insertion_loss", o.insertion_loss, path, 0.0, 1e3);
    o.detector_efficiency =
        get_number_in(obj, "detector_efficiency", o.detector_efficiency, path,
                      0.0, 1.0, /*lo_open=*/true);
    o.dark_count_prob = get_number_in(obj, "dark_count_prob", o.dark_count_prob,
                                      path, 0.0, 1.0, false, /*hi_open=*/true);
    o.mean_photon_number = get_number_in(obj, "mean_photon_number",
                                         o.mean_photon_number, path, 0.0, 1e6);
    return o;
}

DecoyPlan parse_decoy(const json& obj, const std::string& path) {
    check_keys(obj, path, {"classes"});
    const json* classes = find(obj, "classes");
    if (!classes) fail(path, "decoy section needs a classes array");
    if (!classes->is_array() || classes->empty())
        fail(join(path, "classes"), "expected a non-empty array");
    DecoyPlan plan;
    std::size_t i = 0;
    for (const json& entry : *classes) {
        const std::string entry_path =
            join(path, "classes[" + std::to_string(i++) + "]");
        if (!entry.is_object()) fail(entry_path, "expected an object");
        check_keys(entry, entry_path,
                   {"label", "mean_photon_number", "probability"});
        DecoyPlan::Entry e;
        e.label = parse_label(get_string(entry, "label", "signal", entry_path),
                              join(entry_path, "label"));
        e.mean_photon_number = get_number_in(entry, "mean_photon_number", 0.8,
                                             entry_path, 0.0, 1e6);
        e.probability =
            get_number_in(entry, "probability", 1.0, entry_path, 0.0, 1.0);
        plan.entries.push_back(e);
    }
    try {
        plan.validate();
    } catch (const std::invalid_argument& err) {
        fail(path, err.what());
    }
    return plan;
}

DriftConfig parse_drift(const json& obj, const std::string& path) {
    check_keys(obj, path, {"enabled", "sigma"});
    DriftConfig d;
    d.enabled = get_bool(obj, "enabled", d.enabled, path);
    d.sigma = get_number_in(obj, "sigma", d.sigma, path, 0.0, 1e3);
    return d;
}

EveStrategy parse_strategy_table(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object or a strategy name");
    check_keys(obj, path, {"measurements"});
    const json* measurements = find(obj, "measurements");
    if (!measurements || !measurements->is_array() || measurements->empty())
        fail(join(path, "measurements"), "expected a non-empty array");
    EveStrategy strategy;
    std::size_t i = 0;
    for (const json& m : *measurements) {
        const std::string m_path =
            join(path, "measurements[" + std::to_string(i++) + "]");
        if (!m.is_object()) fail(m_path, "expected an object");
        check_keys(m, m_path, {"analyzer_angle", "probability", "outcomes"});
        EveMeasurement meas;
        meas.analyzer_angle = get_number(m, "analyzer_angle", 0.0, m_path);
        meas.probability =
            get_number_in(m, "probability", 1.0, m_path, 0.0, 1.0);
        const json* outcomes = find(m, "outcomes");
        if (!outcomes || !outcomes->is_array() || outcomes->size() != 2)
            fail(join(m_path, "outcomes"), "expected exactly two outcome rules");
        for (int o = 0; o < 2; ++o) {
            const json& rule = (*outcomes)[o];
            const std::string o_path =
                join(m_path, "outcomes[" + std::to_string(o) + "]");
            if (!rule.is_object()) fail(o_path, "expected an object");
            check_keys(rule, o_path,
                       {"action", "resend_symbol", "guess_bit", "guess_basis"});
            const std::string action = get_string(rule, "action", "", o_path);
            if (action == "vacuum") {
                meas.outcomes[o] = OutcomeRule::suppress();
            } else if (action == "resend") {
                const std::uint64_t symbol = get_count(rule, "resend_symbol", 0,
                                                       o_path);
                if (symbol > 3)
                    fail(join(o_path, "resend_symbol"), "must be 0..3");
                OutcomeRule r = OutcomeRule::resend(static_cast<int>(symbol));
                r.guess_bit = static_cast<std::uint8_t>(
                    get_count(rule, "guess_bit", r.guess_bit, o_path));
                r.guess_basis = static_cast<std::uint8_t>(
                    get_count(rule, "guess_basis", r.guess_basis, o_path));
                if (r.guess_bit > 1 || r.guess_basis > 1)
                    fail(o_path, "guess bit/basis must be 0 or 1");
                meas.outcomes[o] = r;
            } else {
                fail(join(o_path, "action"), "must be resend or vacuum");
            }
        }
        strategy.measurements.push_back(meas);
    }
    try {
        strategy.validate();
    } catch (const std::invalid_argument& err) {
        fail(path, err.what());
    }
    return strategy;
}

std::optional<AttackRequest> parse_attack(const json& obj,
                                          const std::string& path) {
    check_keys(obj, path, {"enabled", "remap", "strategy", "optimize"});
    if (!get_bool(obj, "enabled", true, path)) return std::nullopt;

    AttackRequest request;
    if (const json* remap = find(obj, "remap")) {
        const std::string remap_path = join(path, "remap");
        if (!remap->is_object()) fail(remap_path, "expected an object");
        check_keys(*remap, remap_path, {"delta", "eve_fiber_delta"});
        if (const json* d = find(*remap, "delta")) {
            if (!d->is_number()) fail(join(remap_path, "delta"), "expected a number");
            const double delta = d->get<double>();
            if (!(delta > 0.0) || !(delta <= kPi / 2.0) || !std::isfinite(delta))
                fail(join(remap_path, "delta"), "must lie in (0, pi/2]");
            request.delta = delta;
        }
        if (const json* l = find(*remap, "eve_fiber_delta")) {
            if (!l->is_number() || !(l->get<double>() > 0.0))
                fail(join(remap_path, "eve_fiber_delta"), "must be positive");
            request.eve_fiber_delta = l->get<double>();
        }
        if (request.delta && request.eve_fiber_delta)
            fail(remap_path, "give either delta or eve_fiber_delta, not both");
    }

    const json* strategy = find(obj, "strategy");
    if (!strategy) {
        request.kind = AttackRequest::Kind::optimal;
    } else if (strategy->is_string()) {
        const std::string name = strategy->get<std::string>();
        if (name == "canonical")
            request.kind = AttackRequest::Kind::canonical;
        else if (name == "optimal")
            request.kind = AttackRequest::Kind::optimal;
        else
            fail(join(path, "strategy"), "must be canonical, optimal or a table");
    } else {
        request.kind = AttackRequest::Kind::table;
        request.table = parse_strategy_table(*strategy, join(path, "strategy"));
    }

    if (const json* optimize = find(obj, "optimize")) {
        const std::string opt_path = join(path, "optimize");
        if (!optimize->is_object()) fail(opt_path, "expected an object");
        check_keys(*optimize, opt_path, {"delta_min", "delta_max", "delta_step"});
        request.bounds.delta_min =
            get_number_in(*optimize, "delta_min", request.bounds.delta_min,
                          opt_path, 0.0, kPi / 2.0, /*lo_open=*/true);
        request.bounds.delta_max =
            get_number_in(*optimize, "delta_max", request.bounds.delta_max,
                          opt_path, 0.0, kPi / 2.0, /*lo_open=*/true);
        request.bounds.delta_step =
            get_number_in(*optimize, "delta_step", request.bounds.delta_step,
                          opt_path, 0.0, kPi, /*lo_open=*/true);
        if (request.bounds.delta_min > request.bounds.delta_max)
            fail(opt_path, "delta_min must not exceed delta_max");
    }
    return request;
}

SweepSpec parse_sweep(const json& obj, const std::string& path) {
    check_keys(obj, path, {"axis", "points", "min", "max"});
    SweepSpec spec;
    spec.axis = get_string(obj, "axis", spec.axis, path);
    if (spec.axis != "visibility" && spec.axis != "distance" &&
        spec.axis != "delta")
        fail(join(path, "axis"), "must be visibility, distance or delta");
    spec.points = static_cast<int>(get_count(obj, "points", spec.points, path, 1));
    if (find(obj, "min")) spec.min = get_number(obj, "min", 0.0, path);
    if (find(obj, "max")) spec.max = get_number(obj, "max", 0.0, path);
    return spec;
}

Scenario parse_json(const json& root) {
    if (!root.is_object()) fail("", "top level must be an object");
    check_keys(root, "",
               {"pulses", "repetition_rate", "mode", "master_seed", "qber_window",
                "threads", "trojan_monitored", "replay_file", "modulator",
                "optics", "decoy", "drift", "attack", "sweep"});

    Scenario scenario;
    SimConfig& sim = scenario.sim;
    sim.pulses = get_count(root, "pulses", sim.pulses, "", 1);
    sim.repetition_rate = get_number_in(root, "repetition_rate",
                                        sim.repetition_rate, "", 0.0, 1e12,
                                        /*lo_open=*/true);
    const std::string mode = get_string(root, "mode", "simplified", "");
    if (mode == "simplified")
        sim.mode = RunMode::simplified;
    else if (mode == "full")
        sim.mode = RunMode::full;
    else
        fail("mode", "must be simplified or full");
    sim.master_seed = get_count(root, "master_seed", sim.master_seed, "");
    sim.qber_window =
        get_count(root, "qber_window", std::min<std::uint64_t>(10000, sim.pulses),
                  "", 1);
    if (sim.qber_window > sim.pulses)
        fail("qber_window", "must not exceed pulses");
    sim.threads = static_cast<int>(get_count(root, "threads", 1, "", 1));
    sim.trojan_monitored =
        get_bool(root, "trojan_monitored", sim.trojan_monitored, "");

    if (const json* m = find(root, "modulator")) {
        if (!m->is_object()) fail("modulator", "expected an object");
        sim.modulator = parse_modulator(*m, "modulator");
    }
    if (const json* o = find(root, "optics")) {
        if (!o->is_object()) fail("optics", "expected an object");
        sim.optics = parse_optics(*o, "optics");
    }
    if (const json* d = find(root, "decoy")) {
        if (!d->is_object()) fail("decoy", "expected an object");
        sim.decoy = parse_decoy(*d, "decoy");
    } else {
        sim.decoy = DecoyPlan::signal_only(sim.optics.mean_photon_number);
    }
    if (const json* d = find(root, "drift")) {
        if (!d->is_object()) fail("drift", "expected an object");
        sim.drift = parse_drift(*d, "drift");
    }
    if (const json* a = find(root, "attack")) {
        if (!a->is_object()) fail("attack", "expected an object");
        scenario.attack = parse_attack(*a, "attack");
    }
    if (const json* s = find(root, "sweep")) {
        if (!s->is_object()) fail("sweep", "expected an object");
        scenario.sweep = parse_sweep(*s, "sweep");
    }
    scenario.replay_file = get_string(root, "replay_file", "", "");
    if (!scenario.replay_file.empty())
        sim.replay = parse_replay_file(scenario.replay_file);
    return scenario;
}

json strategy_to_json(const EveStrategy& strategy) {
    json measurements = json::array();
    for (const EveMeasurement& m : strategy.measurements) {
        json outcomes = json::array();
        for (const OutcomeRule& rule : m.outcomes) {
            json r;
            if (rule.action == EveAction::vacuum) {
                r["action"] = "vacuum";
            } else {
                r["action"] = "resend";
                r["resend_symbol"] = rule.resend_symbol;
                r["guess_bit"] = rule.guess_bit;
                r["guess_basis"] = rule.guess_basis;
            }
            outcomes.push_back(r);
        }
        measurements.push_back({{"analyzer_angle", m.analyzer_angle},
                                {"probability", m.probability},
                                {"outcomes", outcomes}});
    }
    return json{{"measurements", measurements}};
}

} // namespace

Scenario parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

Scenario parse_config_text(const std::string& text) {
    std::string trimmed = text;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
    if (trimmed.empty()) return Scenario{};
    json root;
    try {
        root = json::parse(trimmed);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config parse failure: ") + err.what());
    }
    return parse_json(root);
}

double resolve_attack_delta(const AttackRequest& request,
                            const ModulatorConfig& modulator) {
    if (request.delta) return *request.delta;
    if (request.eve_fiber_delta)
        return remap_delta_from_fiber(*request.eve_fiber_delta, modulator);
    return kPi / 2.0;
}

std::string effective_config_text(const Scenario& scenario) {
    const SimConfig& sim = scenario.sim;
    json root;
    root["pulses"] = sim.pulses;
    root["repetition_rate"] = sim.repetition_rate;
    root["mode"] = sim.mode == RunMode::simplified ? "simplified" : "full";
    root["master_seed"] = sim.master_seed;
    root["qber_window"] = sim.qber_window;
    root["threads"] = sim.threads;
    root["trojan_monitored"] = sim.trojan_monitored;
    if (!scenario.replay_file.empty()) root["replay_file"] = scenario.replay_file;
    root["modulator"] = {
        {"effective_index", sim.modulator.effective_index},
        {"delay_length", sim.modulator.delay_length},
        {"paired_aoms", sim.modulator.paired_aoms},
        {"base_frequency", sim.modulator.base_frequency},
        {"frequency_resolution", sim.modulator.frequency_resolution}};
    root["optics"] = {{"visibility", sim.optics.visibility},
                      {"loop_length", sim.optics.loop_length},
                      {"attenuation", sim.optics.attenuation},
                      {"insertion_loss", sim.optics.insertion_loss},
                      {"detector_efficiency", sim.optics.detector_efficiency},
                      {"dark_count_prob", sim.optics.dark_count_prob},
                      {"mean_photon_number", sim.optics.mean_photon_number}};
    json classes = json::array();
    for (const DecoyPlan::Entry& e : sim.decoy.entries)
        classes.push_back({{"label", to_string(e.label)},
                           {"mean_photon_number", e.mean_photon_number},
                           {"probability", e.probability}});
    root["decoy"] = {{"classes", classes}};
    root["drift"] = {{"enabled", sim.drift.enabled}, {"sigma", sim.drift.sigma}};
    if (sim.attack) {
        root["attack"] = {{"enabled", true},
                          {"remap", {{"delta", sim.attack->remap.delta}}},
                          {"strategy", strategy_to_json(sim.attack->strategy)}};
    } else if (scenario.attack) {
        // Unresolved request (e.g. echoed before optimization): keep intent.
        json attack{{"enabled", true}};
        if (scenario.attack->delta)
            attack["remap"] = {{"delta", *scenario.attack->delta}};
        else if (scenario.attack->eve_fiber_delta)
            attack["remap"] = {
                {"eve_fiber_delta", *scenario.attack->eve_fiber_delta}};
        switch (scenario.attack->kind) {
        case AttackRequest::Kind::canonical:
            attack["strategy"] = "canonical";
            break;
        case AttackRequest::Kind::optimal:
            attack["strategy"] = "optimal";
            attack["optimize"] = {{"delta_min", scenario.attack->bounds.delta_min},
                                  {"delta_max", scenario.attack->bounds.delta_max},
                                  {"delta_step", scenario.attack->bounds.delta_step}};
            break;
        case AttackRequest::Kind::table:
            attack["strategy"] = strategy_to_json(scenario.attack->table);
            break;
        }
        root["attack"] = attack;
    }
    if (scenario.sweep) {
        json sweep{{"axis", scenario.sweep->axis},
                   {"points", scenario.sweep->points}};
        if (scenario.sweep->min) sweep["min"] = *scenario.sweep->min;
        if (scenario.sweep->max) sweep["max"] = *scenario.sweep->max;
        root["sweep"] = sweep;
    }
    return root.dump(2) + "\n";
}

std::vector<ReplayEntry> parse_replay_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open replay file: " + path.string());
    std::vector<ReplayEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream row(line);
        int bit = -1, basis = -1;
        if (!(row >> bit)) continue; // blank line
        if (!(row >> basis) || bit < 0 || bit > 1 || basis < 0 || basis > 1)
            throw ConfigError("replay file line " + std::to_string(line_no) +
                              ": expected `bit basis [intensity]` with 0|1 values");
        ReplayEntry entry;
        entry.symbol = {static_cast<std::uint8_t>(bit),
                        static_cast<std::uint8_t>(basis)};
        std::string label;
        if (row >> label) {
            if (label == "signal")
                entry.intensity = IntensityLabel::signal;
            else if (label == "decoy")
                entry.intensity = IntensityLabel::decoy;
            else if (label == "vacuum")
                entry.intensity = IntensityLabel::vacuum;
            else
                throw ConfigError("replay file line " + std::to_string(line_no) +
                                  ": unknown intensity label " + label);
        }
        entries.push_back(entry);
    }
    if (entries.empty())
        throw ConfigError("replay file holds no symbols: " + path.string());
    return entries;
}

} // namespace sagnac
