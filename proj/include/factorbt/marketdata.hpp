#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factorbt/date.hpp"

namespace factorbt {

/// Marker for a missing observation in raw (pre-clean) panels.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct PriceSeries {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> close;
  std::vector<double> volume;

  /// Throws InvalidConfig on unequal lengths or unordered dates,
  /// NonPositivePrice / InvalidConfig on bad values.
  void validate() const;
};

struct ReturnSeries {
  std::string asset_id;
  std::vector<Date> dates;  // dates[t] is the day the return was realised
  std::vector<double> returns;
};

/// returns[t] = ln(close[t+1] / close[t]).
std::vector<double> log_returns(std::span<const double> close);
ReturnSeries log_returns(const PriceSeries& prices);

/// One asset's columns aligned to MarketPanel::calendar. Missing values are NaN.
struct AssetRecord {
  std::string asset_id;
  std::string industry;
  std::vector<double> close;
  std::vector<double> volume;
  std::vector<double> pe_ratio;  // empty when the fundamental is absent
  std::vector<double> pb_ratio;
};

struct IndexRecord {
  std::string index_id;  // "MARKET" or the industry name
  std::vector<double> close;
};

struct MarketPanel {
  std::vector<Date> calendar;
  std::vector<AssetRecord> assets;
  IndexRecord market;
  std::vector<IndexRecord> industries;

  std::size_t num_days() const { return calendar.size(); }
  const IndexRecord& industry_index(std::string_view name) const;
  PriceSeries price_series(std::size_t asset) const;
  PriceSeries index_series(const IndexRecord& index) const;

  /// True when no NaN remains in any column.
  bool complete() const;
  /// Checks shapes, calendar ordering, completeness and positivity.
  void validate() const;
};

struct CleanPolicy {
  double mad_threshold = 5.0;
};

/// Clips values outside median +/- k * MAD to the nearest bound, in place.
/// NaN entries are ignored. Returns the number of clipped values.
std::size_t winsorize_mad(std::span<double> column, double k);

/// Linear interpolation of interior NaN runs and forward fill of trailing
/// ones. Leading NaN values are left untouched.
void fill_gaps(std::span<double> column);

/// Fills interior and trailing gaps, drops leading rows until every column
/// has an observation, then winsorizes. Fundamentals and volume are clipped as levels; closes are
/// clipped through their log returns and re-integrated from the first price.
MarketPanel clean(const MarketPanel& panel, const CleanPolicy& policy);

// ---------------------------------------------------------------------------
// Factors

inline constexpr std::array<std::string_view, 5> kFactorNames = {
    "market_return", "industry_return", "pe_ratio", "pb_ratio", "log_volume"};

/// Half-open range of day indices [begin, end).
struct DayRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool contains(std::size_t d) const { return d >= begin && d < end; }
};

struct FactorPanel {
  std::vector<std::string> factor_names;
  std::vector<std::string> asset_ids;
  std::vector<Date> calendar;
  std::vector<double> values;  // day-major, then asset, then factor

  std::size_t num_days() const { return calendar.size(); }
  std::size_t num_assets() const { return asset_ids.size(); }
  std::size_t num_factors() const { return factor_names.size(); }

  double& at(std::size_t day, std::size_t asset, std::size_t factor) {
    return values[(day * num_assets() + asset) * num_factors() + factor];
  }
  double at(std::size_t day, std::size_t asset, std::size_t factor) const {
    return values[(day * num_assets() + asset) * num_factors() + factor];
  }
  std::span<const double> row(std::size_t day, std::size_t asset) const {
    return {values.data() + (day * num_assets() + asset) * num_factors(), num_factors()};
  }

  std::size_t factor_index(std::string_view name) const;
  /// Pooled values of one factor over `days`, ordered day-major then asset.
  std::vector<double> pooled(std::size_t factor, DayRange days) const;
  /// Keeps only the named factors, in the order given.
  FactorPanel select(std::span<const std::string> names) const;
};

/// Per-day, per-asset returns on the factor calendar.
struct ReturnPanel {
  std::vector<std::string> asset_ids;
  std::vector<Date> calendar;
  std::vector<double> values;  // day-major

  std::size_t num_days() const { return calendar.size(); }
  std::size_t num_assets() const { return asset_ids.size(); }
  double at(std::size_t day, std::size_t asset) const { return values[day * num_assets() + asset]; }
  double& at(std::size_t day, std::size_t asset) { return values[day * num_assets() + asset]; }
  std::vector<double> pooled(DayRange days) const;
};

/// Realised log returns of every asset; calendar = panel.calendar[1..].
ReturnPanel asset_returns(const MarketPanel& panel);

/// out.at(d, a) = realised.at(d + 1, a); the last day is NaN.
ReturnPanel shift_forward(const ReturnPanel& realised);

/// Market and industry index log returns, P/E, P/B and log(1 + volume) for
/// every asset-day. The calendar starts at the panel's second day.
FactorPanel compute_factors(const MarketPanel& panel);

/// Z-scores every factor with population mean/std estimated over `fit_range`
/// (pooled across assets) and applies them to every day.
FactorPanel standardize(const FactorPanel& panel, DayRange fit_range);

}  // namespace factorbt
