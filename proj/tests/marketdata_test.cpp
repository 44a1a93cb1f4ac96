#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "factorbt/csv.hpp"
#include "factorbt/error.hpp"
#include "factorbt/market_io.hpp"
#include "factorbt/marketdata.hpp"
#include "factorbt/synth.hpp"
#include "support.hpp"

namespace factorbt {
namespace {

using testing::random_panel;

double sort_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TEST(LogReturns, FlatPricesGiveZero) {
  const std::vector<double> close = {100, 100, 100};
  EXPECT_EQ(log_returns(close), (std::vector<double>{0.0, 0.0}));
}

TEST(LogReturns, EulerNumber) {
  const std::vector<double> close = {1.0, std::numbers::e};
  EXPECT_NEAR(log_returns(close)[0], 1.0, 1e-15);
}

TEST(LogReturns, HundredToHundredFive) {
  const std::vector<double> close = {100, 105};
  const long double oracle = std::log(105.0L / 100.0L);
  EXPECT_NEAR(log_returns(close)[0], static_cast<double>(oracle), 1e-15);
}

TEST(LogReturns, Errors) {
  EXPECT_THROW(log_returns(std::vector<double>{1.0}), Error);
  try {
    log_returns(std::vector<double>{1.0, 0.0, 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositivePrice);
  }
  try {
    log_returns(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySeries);
  }
}

TEST(LogReturns, SeriesKeepsDatesOfRealisation) {
  PriceSeries p;
  p.asset_id = "X";
  p.dates = {Date::from_iso("2020-01-02"), Date::from_iso("2020-01-03"), Date::from_iso("2020-01-06")};
  p.close = {10, 11, 12};
  p.volume = {1, 1, 1};
  const auto r = log_returns(p);
  ASSERT_EQ(r.returns.size(), 2u);
  EXPECT_EQ(r.dates.front(), p.dates[1]);
  EXPECT_EQ(r.returns[1], std::log(12.0 / 11.0));
}

TEST(LogReturns, CumulativeSumRecoversPrices) {
  Rng rng(3);
  std::vector<double> close = {50.0};
  for (int i = 0; i < 500; ++i) {
    close.push_back(close.back() * std::exp(0.02 * rng.normal()));
  }
  const auto r = log_returns(close);
  double acc = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    acc += r[t];
    const double expected = close[t + 1] / close[0];
    EXPECT_NEAR(std::exp(acc), expected, 1e-12 * expected);
  }
}

TEST(FillGaps, InteriorLinear) {
  std::vector<double> col = {1.0, kMissing, 3.0};
  fill_gaps(col);
  EXPECT_EQ(col, (std::vector<double>{1.0, 2.0, 3.0}));
}

TEST(FillGaps, LongRunAndTrailing) {
  std::vector<double> col = {kMissing, 0.0, kMissing, kMissing, kMissing, 4.0, kMissing, kMissing};
  fill_gaps(col);
  EXPECT_TRUE(std::isnan(col[0]));
  EXPECT_DOUBLE_EQ(col[2], 1.0);
  EXPECT_DOUBLE_EQ(col[3], 2.0);
  EXPECT_DOUBLE_EQ(col[4], 3.0);
  EXPECT_EQ(col[6], 4.0);
  EXPECT_EQ(col[7], 4.0);
}

TEST(Winsorize, ClipsToMadOracleBound) {
  std::vector<double> col = {0, 0, 0, 0, 0, 0, 0, 0, 0, 100};
  const std::vector<double> original = col;
  // Independent oracle: sort-based median and MAD.
  const double med = sort_median(original);
  std::vector<double> dev;
  for (double v : original) {
    dev.push_back(std::abs(v - med));
  }
  const double mad = sort_median(dev);
  const std::size_t clipped = winsorize_mad(col, 5.0);
  EXPECT_EQ(clipped, 1u);
  EXPECT_EQ(col.back(), med + 5.0 * mad);
  EXPECT_EQ(col.back(), 0.0);
}

TEST(Winsorize, NoOutliersUnchanged) {
  std::vector<double> col = {1.0, 2.0, 3.0, 4.0, 5.0};
  const auto before = col;
  EXPECT_EQ(winsorize_mad(col, 5.0), 0u);
  EXPECT_EQ(col, before);
}

TEST(Winsorize, SkipsMissing) {
  std::vector<double> col = {1.0, kMissing, 2.0, 3.0, 1000.0};
  winsorize_mad(col, 3.0);
  EXPECT_TRUE(std::isnan(col[1]));
  EXPECT_LT(col[4], 1000.0);
}

TEST(Clean, CompleteCleanPanelIsUnchanged) {
  const MarketPanel p = random_panel(4, 60, 11);
  const MarketPanel c = clean(p, CleanPolicy{});
  ASSERT_EQ(c.calendar, p.calendar);
  for (std::size_t a = 0; a < p.assets.size(); ++a) {
    for (std::size_t t = 0; t < p.num_days(); ++t) {
      EXPECT_NEAR(c.assets[a].close[t], p.assets[a].close[t], 1e-9 * p.assets[a].close[t]);
    }
  }
}

TEST(Clean, DropsLeadingRowsAndFillsGaps) {
  MarketPanel p = random_panel(2, 30, 5);
  p.assets[0].close[0] = kMissing;
  p.assets[1].pe_ratio[1] = kMissing;
  p.assets[0].volume[10] = kMissing;
  p.assets[1].close[29] = kMissing;
  const MarketPanel c = clean(p, CleanPolicy{});
  EXPECT_TRUE(c.complete());
  // Row 0 lacks a close; the P/E gap in row 1 is interior and interpolated.
  EXPECT_EQ(c.num_days(), 29u);
  EXPECT_EQ(c.calendar.front(), p.calendar[1]);
  EXPECT_DOUBLE_EQ(c.assets[1].pe_ratio[0], 0.5 * (p.assets[1].pe_ratio[0] + p.assets[1].pe_ratio[2]));
  EXPECT_DOUBLE_EQ(c.assets[0].volume[9], 0.5 * (p.assets[0].volume[9] + p.assets[0].volume[11]));
  EXPECT_NEAR(c.assets[1].close.back(), c.assets[1].close[27], 1e-9 * c.assets[1].close[27]);
  EXPECT_NO_THROW(c.validate());
}

TEST(Clean, Idempotent) {
  MarketPanel p = random_panel(5, 120, 8);
  p.assets[2].close[40] *= 3.0;
  p.assets[3].pe_ratio[70] = 900.0;
  p.assets[1].volume[3] = kMissing;
  const MarketPanel once = clean(p, CleanPolicy{});
  const MarketPanel twice = clean(once, CleanPolicy{});
  for (std::size_t a = 0; a < once.assets.size(); ++a) {
    EXPECT_EQ(once.assets[a].close, twice.assets[a].close);
    EXPECT_EQ(once.assets[a].volume, twice.assets[a].volume);
    EXPECT_EQ(once.assets[a].pe_ratio, twice.assets[a].pe_ratio);
    EXPECT_EQ(once.assets[a].pb_ratio, twice.assets[a].pb_ratio);
  }
  EXPECT_EQ(once.market.close, twice.market.close);
}

TEST(Clean, SpikeIsWinsorized) {
  MarketPanel p = random_panel(3, 200, 2);
  p.assets[0].pe_ratio[100] = 1e4;
  const MarketPanel c = clean(p, CleanPolicy{});
  EXPECT_LT(c.assets[0].pe_ratio[100], 100.0);
}

TEST(Clean, AllMissingColumn) {
  MarketPanel p = random_panel(2, 10, 1);
  std::fill(p.assets[1].volume.begin(), p.assets[1].volume.end(), kMissing);
  try {
    clean(p, CleanPolicy{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllMissingColumn);
  }
}

TEST(ComputeFactors, FlatMarketAndZeroVolume) {
  MarketPanel p = random_panel(3, 20, 4);
  std::fill(p.market.close.begin(), p.market.close.end(), 1234.0);
  p.assets[1].volume[7] = 0.0;
  const FactorPanel f = compute_factors(p);
  ASSERT_EQ(f.num_days(), 19u);
  ASSERT_EQ(f.num_factors(), 5u);
  const std::size_t mk = f.factor_index("market_return");
  const std::size_t vol = f.factor_index("log_volume");
  for (std::size_t d = 0; d < f.num_days(); ++d) {
    for (std::size_t a = 0; a < f.num_assets(); ++a) {
      EXPECT_EQ(f.at(d, a, mk), 0.0);
    }
  }
  EXPECT_EQ(f.at(6, 1, vol), 0.0);
  EXPECT_EQ(f.calendar.front(), p.calendar[1]);
}

TEST(ComputeFactors, MissingFundamental) {
  MarketPanel p = random_panel(2, 10, 4);
  p.assets[0].pb_ratio.clear();
  try {
    compute_factors(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFundamental);
  }
}

TEST(ComputeFactors, MatchesPlantedRecord) {
  const auto m = synth_generate(SynthConfig{}, 42);
  const FactorPanel f = compute_factors(m.panel);
  EXPECT_EQ(f.factor_names, m.factors.factor_names);
  EXPECT_EQ(f.calendar, m.factors.calendar);
  ASSERT_EQ(f.values.size(), m.factors.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    ASSERT_NEAR(f.values[i], m.factors.values[i], 1e-12 * std::max(1.0, std::abs(f.values[i])));
  }
}

TEST(Standardize, HandComputedOracle) {
  FactorPanel f;
  f.factor_names = {"x"};
  f.asset_ids = {"A"};
  f.calendar = {Date{1}, Date{2}, Date{3}};
  f.values = {1.0, 2.0, 3.0};
  const FactorPanel z = standardize(f, DayRange{0, 3});
  const double s = std::sqrt(2.0 / 3.0);
  EXPECT_NEAR(z.values[0], -1.0 / s, 1e-12);
  EXPECT_NEAR(z.values[0], -1.224744871391589, 1e-12);
  EXPECT_NEAR(z.values[1], 0.0, 1e-15);
  EXPECT_NEAR(z.values[2], 1.224744871391589, 1e-12);
}

TEST(Standardize, ZeroVariance) {
  FactorPanel f;
  f.factor_names = {"x"};
  f.asset_ids = {"A", "B"};
  f.calendar = {Date{1}, Date{2}};
  f.values = {4.0, 4.0, 4.0, 4.0};
  try {
    standardize(f, DayRange{0, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVarianceFactor);
  }
}

TEST(Standardize, MomentsAndIdempotency) {
  const auto m = synth_generate(SynthConfig{}, 5);
  const DayRange fit{100, 600};
  const FactorPanel z = standardize(m.factors, fit);
  for (std::size_t k = 0; k < z.num_factors(); ++k) {
    const auto v = z.pooled(k, fit);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(var), 1.0, 1e-9);
  }
  const FactorPanel again = standardize(z, fit);
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    ASSERT_NEAR(again.values[i], z.values[i], 1e-9);
  }
}

TEST(Standardize, IgnoresValuesOutsideFitRange) {
  const auto m = synth_generate(SynthConfig{}, 6);
  const DayRange fit{0, 300};
  FactorPanel perturbed = m.factors;
  for (std::size_t d = 300; d < perturbed.num_days(); ++d) {
    for (std::size_t a = 0; a < perturbed.num_assets(); ++a) {
      perturbed.at(d, a, 2) *= 7.0;
    }
  }
  const FactorPanel z1 = standardize(m.factors, fit);
  const FactorPanel z2 = standardize(perturbed, fit);
  for (std::size_t d = 0; d < 300; ++d) {
    for (std::size_t a = 0; a < z1.num_assets(); ++a) {
      for (std::size_t k = 0; k < z1.num_factors(); ++k) {
        ASSERT_EQ(z1.at(d, a, k), z2.at(d, a, k));
      }
    }
  }
}

TEST(Synth, Deterministic) {
  const auto a = synth_generate(SynthConfig{}, 9);
  const auto b = synth_generate(SynthConfig{}, 9);
  ASSERT_EQ(a.panel.assets.size(), b.panel.assets.size());
  for (std::size_t i = 0; i < a.panel.assets.size(); ++i) {
    EXPECT_EQ(a.panel.assets[i].close, b.panel.assets[i].close);
    EXPECT_EQ(a.panel.assets[i].pe_ratio, b.panel.assets[i].pe_ratio);
  }
  EXPECT_EQ(a.panel.market.close, b.panel.market.close);
  const auto c = synth_generate(SynthConfig{}, 10);
  EXPECT_NE(a.panel.market.close, c.panel.market.close);
}

TEST(Synth, NoiselessReturnsFollowLinearModel) {
  const SynthConfig cfg = testing::noiseless_config(6, 200, 0.0, 2.0, -1.0);
  const auto m = synth_generate(cfg, 1);
  const ReturnPanel r = asset_returns(m.panel);
  const std::size_t pe = m.factors.factor_index("pe_ratio");
  const std::size_t pb = m.factors.factor_index("pb_ratio");
  for (std::size_t d = 1; d < r.num_days(); ++d) {
    for (std::size_t a = 0; a < r.num_assets(); ++a) {
      const double expected = 2.0 * synth_scaled(pe, m.factors.at(d - 1, a, pe)) -
                              1.0 * synth_scaled(pb, m.factors.at(d - 1, a, pb));
      ASSERT_NEAR(r.at(d, a), expected, 1e-9);
    }
  }
}

TEST(Synth, RegimeDriftWithinThreeStandardErrors) {
  const SynthConfig cfg;
  const auto m = synth_generate(cfg, 42);
  const auto market = log_returns(std::span<const double>(m.panel.market.close));
  ASSERT_EQ(market.size(), m.regimes.size());
  for (const auto& spec : cfg.regimes) {
    std::vector<double> sample;
    for (std::size_t t = 0; t < market.size(); ++t) {
      if (m.regimes[t] == spec.kind) {
        sample.push_back(market[t]);
      }
    }
    ASSERT_GT(sample.size(), 100u);
    double mean = 0.0;
    for (double x : sample) mean += x;
    mean /= static_cast<double>(sample.size());
    const double se = spec.vol / std::sqrt(static_cast<double>(sample.size()));
    EXPECT_LT(std::abs(mean - spec.drift), 3.0 * se) << to_string(spec.kind);
  }
}

TEST(Synth, InvalidConfig) {
  SynthConfig cfg;
  cfg.assets = 0;
  EXPECT_THROW(synth_generate(cfg, 1), Error);
  cfg = SynthConfig{};
  cfg.regimes[1].vol = 0.0;
  try {
    synth_generate(cfg, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}

TEST(MarketIo, RoundTrip) {
  SynthConfig cfg;
  cfg.assets = 4;
  cfg.days = 40;
  const auto m = synth_generate(cfg, 3);
  const auto dir = testing::scratch_dir("market_io");
  save_panel(m.panel, dir / "prices.csv", dir / "index.csv");
  const MarketPanel back = load_panel(dir / "prices.csv", dir / "index.csv");
  EXPECT_EQ(back.calendar, m.panel.calendar);
  ASSERT_EQ(back.assets.size(), m.panel.assets.size());
  for (std::size_t a = 0; a < back.assets.size(); ++a) {
    EXPECT_EQ(back.assets[a].asset_id, m.panel.assets[a].asset_id);
    EXPECT_EQ(back.assets[a].industry, m.panel.assets[a].industry);
    EXPECT_EQ(back.assets[a].close, m.panel.assets[a].close);
    EXPECT_EQ(back.assets[a].pb_ratio, m.panel.assets[a].pb_ratio);
  }
  EXPECT_EQ(back.market.close, m.panel.market.close);
  EXPECT_EQ(prices_csv(back), prices_csv(m.panel));
}

TEST(MarketIo, GapsAndErrors) {
  const auto dir = testing::scratch_dir("market_io_gaps");
  testing::spit(dir / "prices.csv",
                "date,asset_id,close,volume,pe_ratio,pb_ratio\n"
                "2021-01-04,X,10,100,,\n"
                "2021-01-05,X,,110,,\n"
                "2021-01-06,X,12,120,,\n");
  testing::spit(dir / "index.csv",
                "date,index_id,close\n"
                "2021-01-04,MARKET,100\n2021-01-05,MARKET,101\n2021-01-06,MARKET,102\n"
                "2021-01-04,INDUSTRY:ALL,50\n2021-01-05,INDUSTRY:ALL,51\n2021-01-06,INDUSTRY:ALL,52\n");
  const MarketPanel p = load_panel(dir / "prices.csv", dir / "index.csv");
  EXPECT_TRUE(std::isnan(p.assets[0].close[1]));
  EXPECT_TRUE(p.assets[0].pe_ratio.empty());
  EXPECT_EQ(p.assets[0].industry, "ALL");
  const MarketPanel c = clean(p, CleanPolicy{});
  EXPECT_DOUBLE_EQ(c.assets[0].close[1], 11.0);

  testing::spit(dir / "bad.csv", "date,asset,close\n");
  try {
    load_panel(dir / "bad.csv", dir / "index.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
  try {
    load_panel(dir / "missing.csv", dir / "index.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Csv, FormatAndParse) {
  EXPECT_EQ(csv::format_double(0.1), "0.1");
  EXPECT_EQ(csv::format_double(kMissing), "");
  EXPECT_TRUE(std::isnan(csv::parse_double("")));
  EXPECT_EQ(csv::parse_double("2.5"), 2.5);
  EXPECT_THROW(csv::parse_double("abc"), Error);
  const double x = 0.1 + 0.2;
  EXPECT_EQ(csv::parse_double(csv::format_double(x)), x);
}

}  // namespace
}  // namespace factorbt
