#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factorbt/backtest.hpp"
#include "factorbt/error.hpp"
#include "factorbt/marketdata.hpp"
#include "factorbt/synth.hpp"

namespace factorbt::app {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIoError = 3,
  kDiverged = 4,
  kInsufficientData = 5,
};

struct CsvSource {
  std::filesystem::path prices;
  std::filesystem::path index;
};

struct RunConfig {
  std::optional<SynthConfig> synth;
  std::optional<CsvSource> csv;
  CleanPolicy clean;
  BacktestConfig backtest;  // carries the screen and train settings
  std::vector<ModelKind> models = {ModelKind::Linear, ModelKind::Lstm};
  std::filesystem::path output;
  std::optional<std::uint64_t> seed;
  /// data.synth.seed; the generator falls back to `seed` without it.
  std::optional<std::uint64_t> synth_seed;

  std::uint64_t data_seed() const { return synth_seed ? *synth_seed : seed.value_or(0); }

  /// Source, seed and output rules; throws InvalidConfig naming the key.
  void validate() const;
};

/// Parses a JSON run config. Unknown keys are rejected. Relative CSV paths
/// and the output directory are resolved against `base_dir`.
RunConfig parse_run_config(std::string_view json, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::string> models;  // comma separated
};

/// Loads the config, applies overrides and validates it.
RunConfig resolve_config(const std::filesystem::path& path, const Overrides& overrides);

/// Cleaned panel of the configured data source.
MarketPanel load_market(const RunConfig& cfg);

int exit_code_for(ErrorCode code);

int cmd_generate(const std::filesystem::path& config, const Overrides& overrides, std::ostream& out,
                 std::ostream& err);
int cmd_train(const std::filesystem::path& config, const Overrides& overrides, std::ostream& out,
              std::ostream& err);
int cmd_backtest(const std::filesystem::path& config, const Overrides& overrides, std::ostream& out,
                 std::ostream& err);
int cmd_sweep(const std::filesystem::path& config, const Overrides& overrides, std::ostream& out,
              std::ostream& err);

/// Display label of a model in comparison tables.
std::string model_label(ModelKind kind);

}  // namespace factorbt::app
