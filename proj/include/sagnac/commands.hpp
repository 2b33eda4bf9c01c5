#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace sagnac {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;  // validation / configuration problem
inline constexpr int kExitRuntime = 2; // I/O or runtime failure

struct CommandOptions {
    std::string config_path; // empty -> built-in defaults
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string format = "report"; // csv | report

    // sweep only; flags override the config's sweep section
    std::optional<std::string> axis; // visibility | distance | delta
    std::optional<int> points;
    std::optional<double> axis_min;
    std::optional<double> axis_max;
};

int cmd_design(const CommandOptions& options);
int cmd_simulate(const CommandOptions& options);
int cmd_attack(const CommandOptions& options);
int cmd_sweep(const CommandOptions& options);

/// Full argv-level entry point used by the binary; maps exceptions onto the
/// exit-code contract.
int run_cli(int argc, const char* const* argv);

} // namespace sagnac
