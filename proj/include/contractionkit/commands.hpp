#pragma once

#include "contractionkit/runconfig.hpp"

#include <optional>

namespace contractionkit {

/// Exit-code contract shared by all subcommands: 0 = pass, 1 = usage/config/runtime
/// error, 2 = analysis ran and the scientific verdict is negative.
inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;

struct CliOverrides {
    std::optional<std::uint64_t> seed;   // overrides sweep.seed and sim.seed
    std::optional<std::filesystem::path> out_dir;
    int jobs = 1;
};

int cmd_certify(const RunConfig& config, const CliOverrides& overrides = {});
int cmd_counterexample(const RunConfig& config, const CliOverrides& overrides = {});
int cmd_simulate(const RunConfig& config, const CliOverrides& overrides = {});
int cmd_sweep(const RunConfig& config, const CliOverrides& overrides = {});

/// Log level from CONTRACTIONKIT_LOG (quiet | info | debug); info when unset.
enum class LogLevel { quiet = 0, info = 1, debug = 2 };
LogLevel log_level();
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace contractionkit
