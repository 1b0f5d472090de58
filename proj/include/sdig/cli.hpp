#pragma once

#include "sdig/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sdig::cli {

/// Flags shared by every command.
struct GlobalOptions {
  std::optional<std::uint64_t> seed_override;  // replaces algorithm.seed
  std::optional<std::string> output_dir;       // replaces output.dir
  bool quiet = false;
};

/// Exit codes: 0 success, 1 unexpected failure, 2 usage error, and
/// exit_code_for(ErrorCode) for every classified failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Runs the configured experiment and writes `<name>.csv` plus `<name>.meta`
/// into the output directory. A diverged run leaves `<name>.csv.partial`.
int cmd_run(const std::filesystem::path& config_path, const GlobalOptions& options,
            std::ostream& out, std::ostream& err);

/// Prints the rate certificate; exits 0 only when it is valid.
int cmd_certify(const std::filesystem::path& config_path, const GlobalOptions& options,
                std::ostream& out, std::ostream& err);

/// Runs each algorithm on the same instance and seeds until the residual
/// reaches `target` and prints rounds, gradient evaluations and wall time to
/// target. Also writes `<name>.compare.csv`. Unreached targets are reported,
/// not treated as errors.
int cmd_compare(const std::filesystem::path& config_path, const std::vector<Algorithm>& algorithms,
                double target, const GlobalOptions& options, std::ostream& out, std::ostream& err);

std::vector<Algorithm> parse_algorithm_list(const std::string& csv);

}  // namespace sdig::cli
