#include "factorbt/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "factorbt/error.hpp"
#include "factorbt/stats.hpp"

namespace factorbt {

namespace {

bool is_missing(double v) { return std::isnan(v); }

std::size_t first_observed(std::span<const double> column) {
  std::size_t i = 0;
  while (i < column.size() && is_missing(column[i])) {
    ++i;
  }
  return i;
}

// Median and MAD of the non-missing values; false if there are none.
bool median_mad(std::span<const double> column, double& med, double& mad) {
  std::vector<double> observed;
  observed.reserve(column.size());
  for (double v : column) {
    if (!is_missing(v)) {
      observed.push_back(v);
    }
  }
  if (observed.empty()) {
    return false;
  }
  med = stats::median(observed);
  for (double& v : observed) {
    v = std::abs(v - med);
  }
  mad = stats::median(observed);
  return true;
}

// Winsorizes a close column through its log returns. Clipping only fires for
// returns beyond the bound by more than a rounding margin, so a cleaned
// series is a fixed point of this step.
void winsorize_close(std::vector<double>& close, double k) {
  if (close.size() < 3) {
    return;
  }
  std::vector<double> r = log_returns(close);
  double med = 0.0;
  double mad = 0.0;
  median_mad(r, med, mad);
  const double hi = med + k * mad;
  const double lo = med - k * mad;
  const double margin = 1e-9 * std::max(k * mad, std::abs(med)) + 1e-14;
  bool clipped = false;
  for (double& v : r) {
    if (v > hi + margin) {
      v = hi;
      clipped = true;
    } else if (v < lo - margin) {
      v = lo;
      clipped = true;
    }
  }
  if (!clipped) {
    return;
  }
  for (std::size_t t = 0; t < r.size(); ++t) {
    close[t + 1] = close[t] * std::exp(r[t]);
  }
}

void check_column(const std::vector<double>& column, std::size_t days, const std::string& name) {
  if (column.size() != days) {
    throw Error(ErrorCode::InvalidConfig,
                "column '" + name + "' has " + std::to_string(column.size()) +
                    " rows, calendar has " + std::to_string(days));
  }
  if (first_observed(column) == column.size()) {
    throw Error(ErrorCode::AllMissingColumn, "column '" + name + "' has no observed values");
  }
}

}  // namespace

void PriceSeries::validate() const {
  if (dates.size() != close.size() || close.size() != volume.size()) {
    throw Error(ErrorCode::InvalidConfig, "price series '" + asset_id + "' has unequal lengths");
  }
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw Error(ErrorCode::InvalidConfig,
                  "price series '" + asset_id + "' dates not strictly increasing");
    }
  }
  for (double c : close) {
    if (!(c > 0.0)) {
      throw Error(ErrorCode::NonPositivePrice, "price series '" + asset_id + "'");
    }
  }
  for (double v : volume) {
    if (!(v >= 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "negative volume in '" + asset_id + "'");
    }
  }
}

std::vector<double> log_returns(std::span<const double> close) {
  if (close.size() < 2) {
    throw Error(ErrorCode::EmptySeries, "need at least 2 prices, got " + std::to_string(close.size()));
  }
  for (double c : close) {
    if (!(c > 0.0)) {
      throw Error(ErrorCode::NonPositivePrice, "close " + std::to_string(c));
    }
  }
  std::vector<double> out(close.size() - 1);
  for (std::size_t t = 0; t + 1 < close.size(); ++t) {
    out[t] = std::log(close[t + 1] / close[t]);
  }
  return out;
}

ReturnSeries log_returns(const PriceSeries& prices) {
  ReturnSeries out;
  out.asset_id = prices.asset_id;
  out.returns = log_returns(std::span<const double>(prices.close));
  if (prices.dates.size() == prices.close.size()) {
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  }
  return out;
}

const IndexRecord& MarketPanel::industry_index(std::string_view name) const {
  for (const auto& idx : industries) {
    if (idx.index_id == name) {
      return idx;
    }
  }
  throw Error(ErrorCode::MissingIndustry, "no industry index '" + std::string(name) + "'");
}

PriceSeries MarketPanel::price_series(std::size_t asset) const {
  const auto& rec = assets.at(asset);
  return PriceSeries{rec.asset_id, calendar, rec.close, rec.volume};
}

PriceSeries MarketPanel::index_series(const IndexRecord& index) const {
  return PriceSeries{index.index_id, calendar, index.close,
                     std::vector<double>(index.close.size(), 0.0)};
}

bool MarketPanel::complete() const {
  auto full = [](const std::vector<double>& c) { return std::none_of(c.begin(), c.end(), is_missing); };
  for (const auto& a : assets) {
    if (!full(a.close) || !full(a.volume) || !full(a.pe_ratio) || !full(a.pb_ratio)) {
      return false;
    }
  }
  if (!full(market.close)) {
    return false;
  }
  return std::all_of(industries.begin(), industries.end(),
                     [&](const IndexRecord& i) { return full(i.close); });
}

void MarketPanel::validate() const {
  const std::size_t days = calendar.size();
  for (std::size_t i = 1; i < days; ++i) {
    if (!(calendar[i - 1] < calendar[i])) {
      throw Error(ErrorCode::InvalidConfig, "calendar not strictly increasing at " + calendar[i].to_iso());
    }
  }
  if (!complete()) {
    throw Error(ErrorCode::InvalidConfig, "panel has missing values");
  }
  for (std::size_t a = 0; a < assets.size(); ++a) {
    price_series(a).validate();
  }
  index_series(market).validate();
  for (const auto& idx : industries) {
    index_series(idx).validate();
  }
}

std::size_t winsorize_mad(std::span<double> column, double k) {
  if (!(k > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "MAD threshold must be positive");
  }
  double med = 0.0;
  double mad = 0.0;
  if (!median_mad(column, med, mad)) {
    return 0;
  }
  const double hi = med + k * mad;
  const double lo = med - k * mad;
  std::size_t clipped = 0;
  for (double& v : column) {
    if (is_missing(v)) {
      continue;
    }
    if (v > hi) {
      v = hi;
      ++clipped;
    } else if (v < lo) {
      v = lo;
      ++clipped;
    }
  }
  return clipped;
}

void fill_gaps(std::span<double> column) {
  const std::size_t n = column.size();
  std::size_t last = first_observed(column);
  if (last == n) {
    return;
  }
  for (std::size_t i = last + 1; i < n; ++i) {
    if (is_missing(column[i])) {
      continue;
    }
    if (i > last + 1) {
      const double lo = column[last];
      const double hi = column[i];
      const double span = static_cast<double>(i - last);
      for (std::size_t j = last + 1; j < i; ++j) {
        const double w = static_cast<double>(j - last) / span;
        column[j] = lo + w * (hi - lo);
      }
    }
    last = i;
  }
  for (std::size_t j = last + 1; j < n; ++j) {
    column[j] = column[last];
  }
}

MarketPanel clean(const MarketPanel& panel, const CleanPolicy& policy) {
  if (!(policy.mad_threshold > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "MAD threshold must be positive");
  }
  const std::size_t days = panel.calendar.size();
  if (days == 0) {
    throw Error(ErrorCode::EmptySeries, "panel has no days");
  }

  MarketPanel out = panel;
  std::vector<std::vector<double>*> closes;
  std::vector<std::vector<double>*> levels;
  for (auto& a : out.assets) {
    check_column(a.close, days, a.asset_id + ".close");
    check_column(a.volume, days, a.asset_id + ".volume");
    closes.push_back(&a.close);
    levels.push_back(&a.volume);
    if (!a.pe_ratio.empty()) {
      check_column(a.pe_ratio, days, a.asset_id + ".pe_ratio");
      levels.push_back(&a.pe_ratio);
    }
    if (!a.pb_ratio.empty()) {
      check_column(a.pb_ratio, days, a.asset_id + ".pb_ratio");
      levels.push_back(&a.pb_ratio);
    }
  }
  check_column(out.market.close, days, out.market.index_id);
  closes.push_back(&out.market.close);
  for (auto& idx : out.industries) {
    check_column(idx.close, days, idx.index_id);
    closes.push_back(&idx.close);
  }

  // Interior gaps are interpolated on the full history first, so only
  // genuinely leading gaps cost rows.
  std::size_t drop = 0;
  for (auto* c : closes) {
    fill_gaps(*c);
    drop = std::max(drop, first_observed(*c));
  }
  for (auto* c : levels) {
    fill_gaps(*c);
    drop = std::max(drop, first_observed(*c));
  }

  auto trim = [&](std::vector<double>& c) { c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(drop)); };
  out.calendar.erase(out.calendar.begin(), out.calendar.begin() + static_cast<std::ptrdiff_t>(drop));
  for (auto* c : closes) {
    trim(*c);
    winsorize_close(*c, policy.mad_threshold);
  }
  for (auto* c : levels) {
    trim(*c);
    winsorize_mad(*c, policy.mad_threshold);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t FactorPanel::factor_index(std::string_view name) const {
  for (std::size_t k = 0; k < factor_names.size(); ++k) {
    if (factor_names[k] == name) {
      return k;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown factor '" + std::string(name) + "'");
}

std::vector<double> FactorPanel::pooled(std::size_t factor, DayRange days) const {
  std::vector<double> out;
  out.reserve(days.size() * num_assets());
  for (std::size_t d = days.begin; d < days.end; ++d) {
    for (std::size_t a = 0; a < num_assets(); ++a) {
      out.push_back(at(d, a, factor));
    }
  }
  return out;
}

FactorPanel FactorPanel::select(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) {
    idx.push_back(factor_index(n));
  }
  FactorPanel out;
  out.factor_names.assign(names.begin(), names.end());
  out.asset_ids = asset_ids;
  out.calendar = calendar;
  out.values.reserve(num_days() * num_assets() * idx.size());
  for (std::size_t d = 0; d < num_days(); ++d) {
    for (std::size_t a = 0; a < num_assets(); ++a) {
      for (std::size_t k : idx) {
        out.values.push_back(at(d, a, k));
      }
    }
  }
  return out;
}

std::vector<double> ReturnPanel::pooled(DayRange days) const {
  std::vector<double> out;
  out.reserve(days.size() * num_assets());
  for (std::size_t d = days.begin; d < days.end; ++d) {
    for (std::size_t a = 0; a < num_assets(); ++a) {
      out.push_back(at(d, a));
    }
  }
  return out;
}

ReturnPanel asset_returns(const MarketPanel& panel) {
  if (panel.num_days() < 2) {
    throw Error(ErrorCode::EmptySeries, "panel needs at least 2 days");
  }
  ReturnPanel out;
  out.calendar.assign(panel.calendar.begin() + 1, panel.calendar.end());
  for (const auto& a : panel.assets) {
    out.asset_ids.push_back(a.asset_id);
  }
  const std::size_t days = out.calendar.size();
  const std::size_t n = panel.assets.size();
  out.values.assign(days * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    const auto r = log_returns(std::span<const double>(panel.assets[a].close));
    for (std::size_t d = 0; d < days; ++d) {
      out.values[d * n + a] = r[d];
    }
  }
  return out;
}

ReturnPanel shift_forward(const ReturnPanel& realised) {
  ReturnPanel out = realised;
  const std::size_t n = realised.num_assets();
  for (std::size_t d = 0; d < realised.num_days(); ++d) {
    for (std::size_t a = 0; a < n; ++a) {
      out.at(d, a) = d + 1 < realised.num_days() ? realised.at(d + 1, a) : kMissing;
    }
  }
  return out;
}

FactorPanel compute_factors(const MarketPanel& panel) {
  if (!panel.complete()) {
    throw Error(ErrorCode::InvalidConfig, "compute_factors needs a cleaned panel");
  }
  if (panel.num_days() < 2) {
    throw Error(ErrorCode::EmptySeries, "panel needs at least 2 days");
  }
  const std::size_t days = panel.num_days() - 1;
  const std::size_t n = panel.assets.size();

  FactorPanel out;
  out.factor_names.assign(kFactorNames.begin(), kFactorNames.end());
  out.calendar.assign(panel.calendar.begin() + 1, panel.calendar.end());
  out.values.assign(days * n * kFactorNames.size(), 0.0);
  for (const auto& a : panel.assets) {
    out.asset_ids.push_back(a.asset_id);
  }

  const auto market = log_returns(std::span<const double>(panel.market.close));
  for (std::size_t a = 0; a < n; ++a) {
    const auto& rec = panel.assets[a];
    if (rec.pe_ratio.size() != panel.num_days() || rec.pb_ratio.size() != panel.num_days()) {
      throw Error(ErrorCode::MissingFundamental, "asset '" + rec.asset_id + "' lacks P/E or P/B");
    }
    const auto industry =
        log_returns(std::span<const double>(panel.industry_index(rec.industry).close));
    for (std::size_t d = 0; d < days; ++d) {
      out.at(d, a, 0) = market[d];
      out.at(d, a, 1) = industry[d];
      out.at(d, a, 2) = rec.pe_ratio[d + 1];
      out.at(d, a, 3) = rec.pb_ratio[d + 1];
      out.at(d, a, 4) = std::log1p(rec.volume[d + 1]);
    }
  }
  return out;
}

FactorPanel standardize(const FactorPanel& panel, DayRange fit_range) {
  if (fit_range.size() < 2 || fit_range.end > panel.num_days()) {
    throw Error(ErrorCode::InvalidConfig, "fit range must hold at least 2 days inside the panel");
  }
  FactorPanel out = panel;
  for (std::size_t k = 0; k < panel.num_factors(); ++k) {
    const auto fit = panel.pooled(k, fit_range);
    const double mean = stats::mean(fit);
    const double sd = stats::population_stddev(fit, mean);
    if (!(sd >= 1e-12)) {
      throw Error(ErrorCode::ZeroVarianceFactor, "factor '" + panel.factor_names[k] + "'");
    }
    for (std::size_t d = 0; d < panel.num_days(); ++d) {
      for (std::size_t a = 0; a < panel.num_assets(); ++a) {
        out.at(d, a, k) = (panel.at(d, a, k) - mean) / sd;
      }
    }
  }
  return out;
}

}  // namespace factorbt
