#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "factorbt/app.hpp"

namespace app = factorbt::app;

int main(int argc, char** argv) {
  CLI::App cli{"Factor screening, LSTM forecasting and walk-forward backtests"};
  cli.require_subcommand(1);

  std::string config;
  std::string out;
  std::string models;
  auto add = [&](const char* name, const char* help) {
    auto* sub = cli.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--out", out, "Output directory (overrides 'output')");
    sub->add_option("--models", models, "Comma separated models, e.g. linear,lstm");
    return sub;
  };
  auto* generate = add("generate", "Write a synthetic market as prices/index CSV");
  auto* train = add("train", "Fit the LSTM on the full panel and save it");
  auto* backtest = add("backtest", "Walk-forward backtest and model comparison");
  auto* sweep = add("sweep", "Performance along the optimization ladder");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : app::kConfigError;
  }

  app::Overrides overrides;
  if (!out.empty()) {
    overrides.out = out;
  }
  if (!models.empty()) {
    overrides.models = models;
  }
  if (generate->parsed()) {
    return app::cmd_generate(config, overrides, std::cout, std::cerr);
  }
  if (train->parsed()) {
    return app::cmd_train(config, overrides, std::cout, std::cerr);
  }
  if (backtest->parsed()) {
    return app::cmd_backtest(config, overrides, std::cout, std::cerr);
  }
  if (sweep->parsed()) {
    return app::cmd_sweep(config, overrides, std::cout, std::cerr);
  }
  return app::kFailure;
}
