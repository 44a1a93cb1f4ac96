#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "factorbt/backtest.hpp"
#include "factorbt/error.hpp"
#include "factorbt/rng.hpp"
#include "factorbt/risk.hpp"

namespace factorbt {
namespace {

double brute_force_mdd(const std::vector<double>& eq) {
  double worst = 0.0;
  for (std::size_t i = 0; i < eq.size(); ++i)
    for (std::size_t j = i; j < eq.size(); ++j) worst = std::max(worst, (eq[i] - eq[j]) / eq[i]);
  return worst;
}

double sort_var(std::vector<double> r, int confidence_pct) {
  std::sort(r.begin(), r.end());
  const std::size_t n = r.size();
  std::size_t k = (static_cast<std::size_t>(100 - confidence_pct) * n + 99) / 100;
  k = std::clamp<std::size_t>(k, 1, n);
  return r[k - 1];
}

TEST(MaxDrawdown, Examples) {
  EXPECT_EQ(max_drawdown(std::vector<double>{1.0, 1.1, 1.2, 1.5}), 0.0);
  EXPECT_DOUBLE_EQ(max_drawdown(std::vector<double>{1.0, 1.2, 0.9, 1.1}), 0.25);
  EXPECT_DOUBLE_EQ(max_drawdown(std::vector<double>{1.0, 0.5, 1.0, 0.25}), 0.75);
  EXPECT_EQ(max_drawdown(std::vector<double>{3.0}), 0.0);
  EXPECT_DOUBLE_EQ(brute_force_mdd({1.0, 1.2, 0.9, 1.1}), 0.25);
}

TEST(MaxDrawdown, MatchesBruteForce) {
  Rng rng(31);
  for (int c = 0; c < 200; ++c) {
    std::vector<double> eq = {1.0};
    const std::size_t n = 1 + rng.below(80);
    for (std::size_t t = 0; t < n; ++t) eq.push_back(eq.back() * std::exp(0.05 * rng.normal()));
    const double mdd = max_drawdown(eq);
    EXPECT_EQ(mdd, brute_force_mdd(eq));
    EXPECT_GE(mdd, 0.0);
    EXPECT_LE(mdd, 1.0);
  }
}

TEST(Sharpe, Examples) {
  EXPECT_NEAR(sharpe(std::vector<double>{0.01, -0.01, 0.01, -0.01}), 0.0, 1e-15);
  EXPECT_NEAR(sharpe(std::vector<double>{0.01, 0.02, 0.03}), 2.0 * std::sqrt(252.0), 1e-9);
  try {
    sharpe(std::vector<double>{0.01, 0.01, 0.01});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVolatility);
  }
  try {
    sharpe(std::vector<double>{0.01});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewObservations);
  }
  // Risk-free rate is de-annualised.
  EXPECT_NEAR(sharpe(std::vector<double>{0.01, 0.02, 0.03}, 0.252), (0.02 - 0.001) / 0.01 * std::sqrt(252.0), 1e-9);
}

TEST(Var, Examples) {
  std::vector<double> r;
  for (int i = 1; i <= 20; ++i) r.push_back(-0.01 * i);
  EXPECT_DOUBLE_EQ(var_historical(r, 0.95), -0.20);
  EXPECT_EQ(var_historical(std::vector<double>(30, 0.0), 0.95), 0.0);

  Rng rng(4);
  std::vector<double> h;
  for (int i = 0; i < 95; ++i) h.push_back(-0.029 + 0.05 * rng.uniform());
  for (double v : {-0.031, -0.035, -0.04, -0.05, -0.06}) h.push_back(v);
  rng.shuffle(std::span<double>(h));
  EXPECT_DOUBLE_EQ(var_historical(h, 0.95), -0.031);

  try {
    var_historical(std::vector<double>(19, 0.0), 0.95);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewObservations);
  }
  EXPECT_THROW(var_historical(r, 1.0), Error);
}

TEST(Var, MatchesSortOracleAndBelowMedian) {
  Rng rng(5);
  for (std::size_t n = 20; n <= 120; n += 7) {
    std::vector<double> r(n);
    for (auto& v : r) v = 0.01 * rng.normal();
    for (int c : {90, 95, 99}) {
      const double v = var_historical(r, c / 100.0);
      EXPECT_EQ(v, sort_var(r, c)) << n << " " << c;
      std::vector<double> s = r;
      std::sort(s.begin(), s.end());
      EXPECT_LE(v, s[(n - 1) / 2]);
    }
  }
}

TEST(RiskReport, AllZeroReturns) {
  const auto rep = risk_report(std::vector<double>(40, 0.0));
  EXPECT_EQ(rep.max_drawdown, 0.0);
  EXPECT_EQ(rep.var95, 0.0);
  EXPECT_EQ(rep.ann_return, 0.0);
  EXPECT_FALSE(rep.sharpe.has_value());
  EXPECT_EQ(risk_report_csv_row("flat", rep), "flat,0,,0,0,0,0");
}

TEST(RiskReport, ComposesSingleMetricOracles) {
  Rng rng(252);
  std::vector<double> r(252);
  for (auto& v : r) v = 0.0004 + 0.01 * rng.normal();
  const auto rep = risk_report(r);
  std::vector<double> eq = {1.0};
  for (double v : r) eq.push_back(eq.back() * std::exp(v));
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= 252.0;
  double ss = 0.0;
  for (double v : r) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 251.0);
  EXPECT_NEAR(rep.max_drawdown, brute_force_mdd(eq), 1e-12);
  EXPECT_NEAR(*rep.sharpe, mean / sd * std::sqrt(252.0), 1e-9);
  EXPECT_EQ(rep.var95, sort_var(r, 95));
  EXPECT_NEAR(rep.volatility, sd * std::sqrt(252.0), 1e-12);
  EXPECT_NEAR(rep.ann_return, eq.back() - 1.0, 1e-12);
  EXPECT_NEAR(rep.mean_daily_return, mean, 1e-15);
  EXPECT_EQ(rep.observations, 252u);
}

TEST(RiskReport, Table1RowFormatting) {
  RiskReport rep;
  rep.max_drawdown = 0.088;
  rep.sharpe = 0.90;
  rep.var95 = -0.0188;
  EXPECT_EQ(join_cells(overall_cells(rep), " | "), "8.8% | 0.90 | -1.88%");
}

TEST(EquityCurve, FromLogReturns) {
  const auto eq = equity_from_log_returns(std::vector<double>{std::log(1.1), std::log(0.5)});
  ASSERT_EQ(eq.size(), 3u);
  EXPECT_EQ(eq[0], 1.0);
  EXPECT_NEAR(eq[1], 1.1, 1e-15);
  EXPECT_NEAR(eq[2], 0.55, 1e-15);
}

}  // namespace
}  // namespace factorbt
