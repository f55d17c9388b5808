#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sliceq/config.hpp"
#include "sliceq/metrics.hpp"
#include "sliceq/scenario.hpp"

namespace sliceq::cli {

enum ExitCode : int { kOk = 0, kRunFailure = 1, kConfigInvalid = 2 };

/// Output directory: --out-dir, then the config file, then $SLICEQ_OUT_DIR,
/// then the working directory.
std::filesystem::path resolve_output_dir(const RunConfig& config);

/// Writes <stem>.csv and <stem>.json into dir and returns both paths.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const RunConfig& config,
                                                 const std::filesystem::path& dir,
                                                 const std::string& stem);

/// Human-readable summary block.
std::string format_summary(const RunResult& result);

/// Mean and sample standard deviation of every RunSummary statistic across
/// runs, with the number of samples behind each.
nlohmann::json aggregate(std::span<const RunSummary> summaries);

int cmd_run(const std::string& config_path, const ConfigOverrides& overrides, std::ostream& out,
            std::ostream& err);
int cmd_sweep(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
              const ConfigOverrides& overrides, unsigned jobs, std::ostream& out, std::ostream& err);
int cmd_validate(const std::string& config_path, const ConfigOverrides& overrides,
                 std::ostream& out, std::ostream& err);
int cmd_check_model(const std::string& model_path, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace sliceq::cli
