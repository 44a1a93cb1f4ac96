#include "factorbt/risk.hpp"

#include <algorithm>
#include <cmath>

#include "factorbt/csv.hpp"
#include "factorbt/error.hpp"
#include "factorbt/stats.hpp"

namespace factorbt {

std::vector<double> equity_from_log_returns(std::span<const double> log_returns) {
  std::vector<double> equity(log_returns.size() + 1);
  equity[0] = 1.0;
  for (std::size_t t = 0; t < log_returns.size(); ++t) {
    equity[t + 1] = equity[t] * std::exp(log_returns[t]);
  }
  return equity;
}

double max_drawdown(std::span<const double> equity) {
  double peak = 0.0;
  double worst = 0.0;
  for (double v : equity) {
    peak = std::max(peak, v);
    if (peak > 0.0) {
      worst = std::max(worst, (peak - v) / peak);
    }
  }
  return worst;
}

double sharpe(std::span<const double> returns, double rf, double periods_per_year) {
  if (returns.size() < 2) {
    throw Error(ErrorCode::TooFewObservations, "Sharpe ratio needs at least 2 returns");
  }
  const double sd = stats::sample_stddev(returns);
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::ZeroVolatility, "Sharpe ratio undefined for constant returns");
  }
  return (stats::mean(returns) - rf / periods_per_year) / sd * std::sqrt(periods_per_year);
}

double var_historical(std::span<const double> returns, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "confidence must lie in (0, 1)");
  }
  if (returns.size() < 20) {
    throw Error(ErrorCode::TooFewObservations, "VaR needs at least 20 returns, got " + std::to_string(returns.size()));
  }
  const auto n = static_cast<double>(returns.size());
  // Guard against (1 - c) * N landing a hair above an integer.
  auto k = static_cast<std::size_t>(std::ceil((1.0 - confidence) * n - 1e-9));
  k = std::clamp<std::size_t>(k, 1, returns.size());
  std::vector<double> v(returns.begin(), returns.end());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

double annualized_volatility(std::span<const double> returns, double periods_per_year) {
  return stats::sample_stddev(returns) * std::sqrt(periods_per_year);
}

RiskReport risk_report(std::span<const double> returns, double rf, double periods_per_year) {
  RiskReport r;
  r.observations = returns.size();
  r.var95 = var_historical(returns, 0.95);
  const auto equity = equity_from_log_returns(returns);
  r.max_drawdown = max_drawdown(equity);
  try {
    r.sharpe = sharpe(returns, rf, periods_per_year);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroVolatility) {
      throw;
    }
  }
  r.volatility = annualized_volatility(returns, periods_per_year);
  r.ann_return = std::pow(equity.back(), periods_per_year / static_cast<double>(returns.size())) - 1.0;
  r.mean_daily_return = stats::mean(returns);
  return r;
}

std::string risk_report_csv_row(const std::string& strategy, const RiskReport& report) {
  std::string row = strategy;
  row += ',' + csv::format_double(report.max_drawdown);
  row += ',' + (report.sharpe ? csv::format_double(*report.sharpe) : std::string());
  row += ',' + csv::format_double(report.var95);
  row += ',' + csv::format_double(report.volatility);
  row += ',' + csv::format_double(report.ann_return);
  row += ',' + csv::format_double(report.mean_daily_return);
  return row;
}

}  // namespace factorbt
