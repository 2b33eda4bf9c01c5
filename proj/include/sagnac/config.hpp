#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "sagnac/attacks.hpp"
#include "sagnac/sim.hpp"

namespace sagnac {

/// Configuration problem: missing file, unknown key, type or range
/// violation. The message names the offending key path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// How the attack subcommand should obtain its eavesdropping strategy.
struct AttackRequest {
    enum class Kind { canonical, optimal, table };
    Kind kind = Kind::optimal;
    std::optional<double> delta;           // explicit remap step
    std::optional<double> eve_fiber_delta; // metres; remap from fiber geometry
    EveStrategy table;                     // kind == table
    OptimizeBounds bounds;                 // kind == optimal
};

struct SweepSpec {
    std::string axis = "visibility"; // visibility | distance | delta
    int points = 5;
    std::optional<double> min; // absent -> per-axis default
    std::optional<double> max;
};

struct Scenario {
    SimConfig sim; // sim.attack stays empty until the request is resolved
    std::optional<AttackRequest> attack;
    std::optional<SweepSpec> sweep;
    std::string replay_file;
};

/// Parse a scenario file (JSON). Unknown keys are rejected; every range
/// violation names its key path. An empty or absent file yields defaults.
Scenario parse_config(const std::filesystem::path& path);
Scenario parse_config_text(const std::string& text);

/// Resolve the remap step of a request: explicit delta wins, otherwise the
/// eavesdropper fiber geometry, otherwise pi/2 (identity).
double resolve_attack_delta(const AttackRequest& request,
                            const ModulatorConfig& modulator);

/// Serialize the fully-resolved configuration; parsing the result
/// reproduces the run byte for byte.
std::string effective_config_text(const Scenario& scenario);

std::vector<ReplayEntry> parse_replay_file(const std::filesystem::path& path);

} // namespace sagnac
