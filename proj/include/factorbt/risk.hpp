#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factorbt/date.hpp"

namespace factorbt {

inline constexpr double kTradingDays = 252.0;

struct EquityCurve {
  std::vector<Date> dates;
  std::vector<double> equity;  // starts at 1.0
};

/// Equity curve from daily log returns: equity[0] = 1, equity[t+1] = equity[t] * exp(r[t]).
std::vector<double> equity_from_log_returns(std::span<const double> log_returns);

/// Largest peak-to-trough loss as a fraction of the running peak. O(n).
double max_drawdown(std::span<const double> equity);
inline double max_drawdown(const EquityCurve& curve) { return max_drawdown(curve.equity); }

/// ((mean - rf/periods) / sample_std) * sqrt(periods). Throws ZeroVolatility
/// (constant series) or TooFewObservations (< 2 values).
double sharpe(std::span<const double> returns, double rf = 0.0, double periods_per_year = kTradingDays);

/// k-th smallest return with k = ceil((1 - confidence) * N); signed, so a
/// loss is negative. Throws TooFewObservations (N < 20) or InvalidConfig.
double var_historical(std::span<const double> returns, double confidence = 0.95);

/// Annualised sample standard deviation.
double annualized_volatility(std::span<const double> returns, double periods_per_year = kTradingDays);

struct RiskReport {
  double max_drawdown = 0.0;
  std::optional<double> sharpe;  // absent when volatility is zero
  double var95 = 0.0;
  double volatility = 0.0;
  double ann_return = 0.0;
  double mean_daily_return = 0.0;
  std::size_t observations = 0;
};

/// All metrics from one series of daily log returns (N >= 20).
RiskReport risk_report(std::span<const double> returns, double rf = 0.0, double periods_per_year = kTradingDays);

inline constexpr const char* kRiskReportHeader =
    "strategy,max_drawdown,sharpe,var95,volatility,ann_return,mean_daily_return";

/// One CSV row (no newline); an absent Sharpe ratio is an empty field.
std::string risk_report_csv_row(const std::string& strategy, const RiskReport& report);

}  // namespace factorbt
