#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include "factorbt/app.hpp"
#include "factorbt/csv.hpp"
#include "factorbt/factors.hpp"
#include "factorbt/lstm.hpp"
#include "factorbt/market_io.hpp"

namespace factorbt::app {

namespace fs = std::filesystem;

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "factorbt: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "factorbt: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "factorbt: " << e.what() << '\n';
    return kFailure;
  }
}

void check_report(const fs::path& path) {
  const auto rows = csv::read_file(path, kRiskReportHeader);
  for (const auto& row : rows) {
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (!std::isfinite(csv::parse_double(row[c]))) {
        throw Error(ErrorCode::NonFiniteInput, path.string() + ": non-finite metric for '" + row[0] + "'");
      }
    }
  }
}

}  // namespace

std::string model_label(ModelKind kind) {
  return kind == ModelKind::Linear ? "Benchmark model" : "LSTM model";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
      return kConfigError;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
      return kIoError;
    case ErrorCode::DivergedLoss:
      return kDiverged;
    case ErrorCode::InsufficientData:
    case ErrorCode::TooShort:
      return kInsufficientData;
    default:
      return kFailure;
  }
}

MarketPanel load_market(const RunConfig& cfg) {
  MarketPanel raw = cfg.synth ? synth_generate(*cfg.synth, cfg.data_seed()).panel
                              : load_panel(cfg.csv->prices, cfg.csv->index);
  return clean(raw, cfg.clean);
}

int cmd_generate(const fs::path& config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(config, overrides);
    if (!cfg.synth) {
      throw Error(ErrorCode::InvalidConfig, "generate needs a 'data.synth' source");
    }
    const auto market = synth_generate(*cfg.synth, cfg.data_seed());
    save_panel(market.panel, cfg.output / "prices.csv", cfg.output / "index.csv");
    out << "wrote " << market.panel.assets.size() * market.panel.calendar.size() << " price rows to "
        << (cfg.output / "prices.csv").string() << '\n';
    return kOk;
  });
}

int cmd_train(const fs::path& config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(config, overrides);
    if (!cfg.seed) {
      throw Error(ErrorCode::InvalidConfig, "missing key 'seed' (required for training)");
    }
    cfg.backtest.train_cfg.validate();
    cfg.backtest.screen.validate();

    const MarketPanel panel = load_market(cfg);
    const FactorPanel raw = compute_factors(panel);
    const ReturnPanel realised = asset_returns(panel);
    const ReturnPanel fwd = shift_forward(realised);
    const DayRange all{0, raw.num_days()};
    if (all.size() < 3) {
      throw Error(ErrorCode::InsufficientData, "need at least 3 return days");
    }

    const FactorPanel z = standardize(raw.select(varying_factors(raw, all)), all);
    const ScreenResult screen = screen_factors(z, fwd, DayRange{0, all.end - 1}, cfg.backtest.screen);
    const FactorPanel x = z.select(screen.selected);

    lstm::TrainConfig tc = cfg.backtest.train_cfg;
    tc.seed = *cfg.seed;
    const auto samples = lstm::make_windows(x, realised, tc.window, all);
    const auto trained = lstm::train(samples, tc);

    lstm::save_params(trained.params, cfg.output / "model.fbtl");
    std::string curve = "epoch,loss\n";
    for (std::size_t e = 0; e < trained.loss_curve.size(); ++e) {
      curve += std::to_string(e + 1) + ',' + csv::format_double(trained.loss_curve[e]) + '\n';
    }
    csv::write_file(cfg.output / "training.csv", curve);
    std::ostringstream factors;
    write_factor_report(factors, screen);
    csv::write_file(cfg.output / "factors.csv", factors.str());
    std::ostringstream corr;
    write_correlation_matrix(corr, screen.stats);
    csv::write_file(cfg.output / "correlation.csv", corr.str());

    out << "trained on " << samples.size() << " windows of " << tc.window << " days using";
    for (const auto& name : screen.selected) {
      out << ' ' << name;
    }
    out << "\nfinal training loss " << csv::format_double(trained.loss_curve.back()) << '\n';
    return kOk;
  });
}

int cmd_backtest(const fs::path& config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(config, overrides);
    if (cfg.models.front() != ModelKind::Linear) {
      cfg.models.insert(cfg.models.begin(), ModelKind::Linear);
    }
    const MarketPanel panel = load_market(cfg);

    std::vector<BacktestResult> results;
    results.reserve(cfg.models.size());
    for (ModelKind kind : cfg.models) {
      BacktestConfig b = cfg.backtest;
      b.model_kind = kind;
      results.push_back(walk_forward(panel, b));
    }

    std::vector<NamedResult> by_id;
    std::vector<NamedResult> by_label;
    for (std::size_t i = 0; i < results.size(); ++i) {
      by_id.push_back({std::string(to_string(cfg.models[i])), &results[i]});
      by_label.push_back({model_label(cfg.models[i]), &results[i]});
    }
    const ComparisonTable table = compare_models(by_label);
    const std::string text = render_comparison_text(table);

    for (const auto& nr : by_id) {
      write_run_directory(*nr.result, nr.name, cfg.output / nr.name);
    }
    csv::write_file(cfg.output / "equity.csv", equity_csv(by_id));
    csv::write_file(cfg.output / "report.csv", report_csv(by_id));
    csv::write_file(cfg.output / "regimes.csv", regimes_csv(results.front()));
    csv::write_file(cfg.output / "comparison.csv", render_comparison_csv(table));
    csv::write_file(cfg.output / "comparison.txt", text);
    check_report(cfg.output / "report.csv");

    out << text;
    return kOk;
  });
}

int cmd_sweep(const fs::path& config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(config, overrides);
    if (!cfg.seed) {
      throw Error(ErrorCode::InvalidConfig, "missing key 'seed' (the sweep trains the lstm model)");
    }
    const MarketPanel panel = load_market(cfg);
    std::vector<int> degrees;
    for (int d = 0; d <= kMaxSweepDegree; ++d) {
      degrees.push_back(d);
    }
    const auto rows = optimization_sweep(panel, cfg.backtest, degrees);
    const std::string text = sweep_csv(rows);
    csv::write_file(cfg.output / "sweep.csv", text);
    out << text;
    return kOk;
  });
}

}  // namespace factorbt::app
