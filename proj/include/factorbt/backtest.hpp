#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factorbt/factors.hpp"
#include "factorbt/lstm.hpp"
#include "factorbt/marketdata.hpp"
#include "factorbt/regime.hpp"
#include "factorbt/risk.hpp"

namespace factorbt {

enum class ModelKind { Linear, Lstm };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> model_kind_from_string(std::string_view s);

struct BacktestConfig {
  std::size_t train_days = 750;
  std::size_t test_days = 250;
  double top_fraction = 0.2;
  double vol_target = 0.15;       // annualised
  double drawdown_limit = 0.10;
  bool vol_targeting = true;
  bool drawdown_control = true;
  std::size_t vol_window = 20;    // days of trailing portfolio returns
  double cost_rate = 0.0;         // proportional cost per unit of turnover
  ModelKind model_kind = ModelKind::Linear;
  lstm::TrainConfig train_cfg;
  ScreenConfig screen;
  /// Seeds model training; fold k trains with seed + k.
  std::uint64_t seed = 0;
  std::size_t regime_lookback = 60;
  double regime_threshold = 0.10;
  double risk_free = 0.0;

  void validate() const;
};

/// Label of each day t >= lookback from the sum of the `lookback` index log
/// returns strictly before t. Earlier days are unlabeled.
std::vector<std::optional<Regime>> classify_regimes(std::span<const double> index_returns,
                                                    std::size_t lookback = 60, double threshold = 0.10);

/// Names of the factors with non-zero spread over `range`. Throws
/// NoFactorsSurvive when every factor is constant.
std::vector<std::string> varying_factors(const FactorPanel& panel, DayRange range);

/// Equal weights on the ceil(top_fraction * N) highest predictions; ties go to
/// the lexicographically smaller asset id.
std::vector<double> construct_portfolio(std::span<const double> predictions,
                                        std::span<const std::string> asset_ids, double top_fraction);

/// Scales by min(1, vol_target / realized_vol) (when realized_vol > 0), then
/// halves once more while running_drawdown exceeds the limit.
std::vector<double> apply_risk_constraints(std::span<const double> weights, double realized_vol,
                                           double running_drawdown, const BacktestConfig& cfg);

/// Out-of-sample model output of every walk-forward fold.
struct Forecasts {
  std::vector<std::string> asset_ids;
  std::vector<std::size_t> decision_days;  // factor-calendar index t; trades earn day t + 1
  std::vector<std::vector<double>> predictions;
  std::vector<std::size_t> fold;
  std::vector<std::vector<std::string>> selected_factors;  // per fold
};

struct BacktestResult {
  std::vector<std::string> asset_ids;
  EquityCurve equity;                  // equity[0] = 1 on the first decision date
  std::vector<Date> decision_dates;
  std::vector<std::vector<double>> weights_history;
  std::vector<Date> return_dates;
  std::vector<double> daily_returns;   // portfolio log returns
  std::vector<std::vector<double>> predictions;
  std::vector<std::vector<double>> realized;  // asset log returns on the return day
  std::vector<std::optional<Regime>> regimes;
  std::map<Regime, RiskReport> per_regime;    // regimes with >= 20 days
  RiskReport overall;
  std::vector<std::vector<std::string>> selected_factors;
};

/// Fits the configured model on each rolling train window and predicts the
/// following test window. Throws InsufficientData; model errors carry the
/// fold index in their message.
Forecasts forecast_walk_forward(const MarketPanel& panel, const BacktestConfig& cfg);

/// Trades a set of forecasts with the portfolio and risk rules of `cfg`.
BacktestResult simulate(const MarketPanel& panel, const Forecasts& forecasts, const BacktestConfig& cfg);

/// forecast_walk_forward followed by simulate. `panel` must be clean.
BacktestResult walk_forward(const MarketPanel& panel, const BacktestConfig& cfg);

struct HoldoutScore {
  double linear_mse = 0.0;
  double lstm_mse = 0.0;
  std::size_t train_days = 0;
  std::size_t test_samples = 0;
  std::vector<std::string> selected_factors;
};

/// Single chronological split: both models are fitted on the first
/// `train_fraction` of the factor days and scored on the same next-day
/// targets of the remainder.
HoldoutScore holdout_comparison(const MarketPanel& panel, const BacktestConfig& cfg, double train_fraction = 0.8);

struct NamedResult {
  std::string name;
  const BacktestResult* result = nullptr;
};

struct ComparisonTable {
  std::vector<std::string> models;
  std::vector<RiskReport> overall;
  std::map<Regime, std::vector<std::optional<RiskReport>>> per_regime;
};

/// Throws CalendarMismatch unless every result covers the same return dates.
ComparisonTable compare_models(std::span<const NamedResult> results);

/// "12.5%", "0.68", "-2.35%": drawdown, Sharpe, VaR.
std::vector<std::string> overall_cells(const RiskReport& report);
/// "0.352", "4.95", "0.72", "-1.10": mean daily return (%), drawdown (%),
/// Sharpe, VaR (%).
std::vector<std::string> regime_cells(const RiskReport& report);
std::string join_cells(std::span<const std::string> cells, std::string_view sep);

std::string render_comparison_text(const ComparisonTable& table);
std::string render_comparison_csv(const ComparisonTable& table);

struct SweepRow {
  int degree = 0;
  double ann_return = 0.0;
  std::optional<double> sharpe;
  double volatility = 0.0;
  double max_drawdown = 0.0;
};

inline constexpr int kMaxSweepDegree = 4;

/// Configuration of ladder rung `degree` derived from `base`:
/// 0 linear without risk scaling, 1 LSTM, 2 + volatility targeting,
/// 3 + drawdown control, 4 + doubled training epochs.
BacktestConfig sweep_rung_config(const BacktestConfig& base, int degree);

/// One walk-forward run per rung, in order. Rungs sharing a model reuse its
/// forecasts.
std::vector<SweepRow> optimization_sweep(const MarketPanel& panel, const BacktestConfig& base,
                                         std::span<const int> degrees);

std::string sweep_csv(std::span<const SweepRow> rows);

/// equity.csv, weights.csv, report.csv and regimes.csv for one strategy.
void write_run_directory(const BacktestResult& result, const std::string& strategy,
                         const std::filesystem::path& dir);
/// RiskReport rows: one per strategy plus one per "strategy:regime".
std::string report_csv(std::span<const NamedResult> results);
/// date,label for every out-of-sample return day; unlabeled days are empty.
std::string regimes_csv(const BacktestResult& result);
/// Equity curves side by side: date,<name>,...
std::string equity_csv(std::span<const NamedResult> results);

}  // namespace factorbt
