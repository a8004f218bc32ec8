#pragma once

#include "chfe/io.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace chfe::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_verify_failed = 1,
    exit_config = 2,
    exit_numeric = 3,
    exit_not_converged = 4,
    exit_refused = 5,
};

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
};

/// Defaults of a command as config text; every accepted key appears (empty = unset).
std::string default_config(const std::string& command);

/// Defaults merged with the user's file (unknown keys rejected) and the global flag overrides.
io::Config resolve_config(const std::string& command, const GlobalOptions& g);

int cmd_psi(const io::Config& cfg, const GlobalOptions& g);
int cmd_scan(const io::Config& cfg, const GlobalOptions& g);
int cmd_verify(const io::Config& cfg, const GlobalOptions& g);
int cmd_minimize(const io::Config& cfg, const GlobalOptions& g);
int cmd_energy(const io::Config& cfg, const GlobalOptions& g);

/// Full command line; maps library errors to exit codes.
int run(int argc, char** argv);

} // namespace chfe::cli
