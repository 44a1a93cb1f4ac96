#include "factorbt/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "factorbt/csv.hpp"
#include "factorbt/error.hpp"
#include "factorbt/stats.hpp"

namespace factorbt {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::Linear ? "linear" : "lstm";
}

std::optional<ModelKind> model_kind_from_string(std::string_view s) {
  if (s == "linear") {
    return ModelKind::Linear;
  }
  if (s == "lstm") {
    return ModelKind::Lstm;
  }
  return std::nullopt;
}

void BacktestConfig::validate() const {
  if (train_days < 2 || test_days < 1) {
    throw Error(ErrorCode::InvalidConfig, "train_days must be >= 2 and test_days >= 1");
  }
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "top_fraction must lie in (0, 1]");
  }
  if (!(vol_target > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "vol_target must be positive");
  }
  if (!(drawdown_limit > 0.0 && drawdown_limit < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "drawdown_limit must lie in (0, 1)");
  }
  if (vol_window < 2 || !(cost_rate >= 0.0) || regime_lookback < 1 || !(regime_threshold >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "invalid vol_window, cost_rate or regime settings");
  }
  screen.validate();
  if (model_kind == ModelKind::Lstm) {
    train_cfg.validate();
  }
}

std::vector<std::optional<Regime>> classify_regimes(std::span<const double> index_returns, std::size_t lookback,
                                                    double threshold) {
  if (lookback == 0 || index_returns.size() <= lookback) {
    throw Error(ErrorCode::TooShort, "need more than " + std::to_string(lookback) + " index returns");
  }
  std::vector<std::optional<Regime>> labels(index_returns.size());
  for (std::size_t t = lookback; t < index_returns.size(); ++t) {
    const double window = std::accumulate(index_returns.begin() + static_cast<std::ptrdiff_t>(t - lookback),
                                          index_returns.begin() + static_cast<std::ptrdiff_t>(t), 0.0);
    if (window >= threshold) {
      labels[t] = Regime::Bull;
    } else if (window <= -threshold) {
      labels[t] = Regime::Bear;
    } else {
      labels[t] = Regime::Shock;
    }
  }
  return labels;
}

std::vector<double> construct_portfolio(std::span<const double> predictions, std::span<const std::string> asset_ids,
                                        double top_fraction) {
  const std::size_t n = predictions.size();
  if (asset_ids.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "predictions and asset ids differ in length");
  }
  std::vector<double> weights(n, 0.0);
  if (n == 0) {
    return weights;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (predictions[a] != predictions[b]) {
      return predictions[a] > predictions[b];
    }
    return asset_ids[a] < asset_ids[b];
  });
  auto count = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, n);
  const double w = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) {
    weights[order[i]] = w;
  }
  return weights;
}

std::vector<double> apply_risk_constraints(std::span<const double> weights, double realized_vol,
                                           double running_drawdown, const BacktestConfig& cfg) {
  double scale = 1.0;
  if (cfg.vol_targeting && realized_vol > 0.0) {
    scale = std::min(1.0, cfg.vol_target / realized_vol);
  }
  if (cfg.drawdown_control && running_drawdown > cfg.drawdown_limit) {
    scale *= 0.5;
  }
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) {
    w *= scale;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> varying_factors(const FactorPanel& panel, DayRange range) {
  std::vector<std::string> keep;
  for (std::size_t k = 0; k < panel.num_factors(); ++k) {
    const auto v = panel.pooled(k, range);
    if (stats::population_stddev(v, stats::mean(v)) >= 1e-12) {
      keep.push_back(panel.factor_names[k]);
    }
  }
  if (keep.empty()) {
    throw Error(ErrorCode::NoFactorsSurvive, "every factor is constant over the training window");
  }
  return keep;
}

namespace {

struct FoldPlan {
  DayRange train;
  DayRange test;  // return days traded in this fold
};

std::vector<FoldPlan> plan_folds(std::size_t days, const BacktestConfig& cfg) {
  if (days < cfg.train_days + cfg.test_days) {
    throw Error(ErrorCode::InsufficientData, "panel has " + std::to_string(days) + " return days, need " +
                                                 std::to_string(cfg.train_days + cfg.test_days));
  }
  std::vector<FoldPlan> folds;
  for (std::size_t s = 0; s + cfg.train_days < days; s += cfg.test_days) {
    const std::size_t split = s + cfg.train_days;
    folds.push_back(FoldPlan{{s, split}, {split, std::min(split + cfg.test_days, days)}});
  }
  return folds;
}

void forecast_fold(const FactorPanel& raw, const ReturnPanel& realised, const ReturnPanel& fwd,
                   const FoldPlan& fold, std::size_t fold_index, const BacktestConfig& cfg, Forecasts& out) {
  // Pairs (factors at d, return at d + 1) must both lie in the train window.
  const DayRange pairs{fold.train.begin, fold.train.end - 1};
  const FactorPanel usable = raw.select(varying_factors(raw, fold.train));
  const FactorPanel z = standardize(usable, fold.train);
  const ScreenResult screen = screen_factors(z, fwd, pairs, cfg.screen);
  const FactorPanel x = z.select(screen.selected);
  out.selected_factors.push_back(screen.selected);

  const std::size_t n_assets = x.num_assets();
  auto emit = [&](std::size_t t, std::vector<double> preds) {
    out.decision_days.push_back(t);
    out.predictions.push_back(std::move(preds));
    out.fold.push_back(fold_index);
  };

  if (cfg.model_kind == ModelKind::Linear) {
    const LinearModel model = fit_ols(x, fwd, pairs);
    for (std::size_t u = fold.test.begin; u < fold.test.end; ++u) {
      const std::size_t t = u - 1;
      std::vector<double> preds(n_assets);
      for (std::size_t a = 0; a < n_assets; ++a) {
        preds[a] = predict_linear(model, x.row(t, a));
      }
      emit(t, std::move(preds));
    }
    return;
  }

  lstm::TrainConfig tc = cfg.train_cfg;
  tc.seed = cfg.seed + fold_index;
  const auto samples = lstm::make_windows(x, realised, tc.window, fold.train);
  const auto trained = lstm::train(samples, tc);
  for (std::size_t u = fold.test.begin; u < fold.test.end; ++u) {
    const std::size_t t = u - 1;
    std::vector<double> preds(n_assets);
    for (std::size_t a = 0; a < n_assets; ++a) {
      preds[a] = lstm::predict(trained.params, lstm::window_inputs(x, a, t, tc.window));
    }
    emit(t, std::move(preds));
  }
}

}  // namespace

Forecasts forecast_walk_forward(const MarketPanel& panel, const BacktestConfig& cfg) {
  cfg.validate();
  if (!panel.complete()) {
    throw Error(ErrorCode::InvalidConfig, "walk_forward needs a cleaned panel");
  }
  const FactorPanel raw = compute_factors(panel);
  const ReturnPanel realised = asset_returns(panel);
  const ReturnPanel fwd = shift_forward(realised);
  const auto folds = plan_folds(raw.num_days(), cfg);
  if (cfg.model_kind == ModelKind::Lstm && cfg.train_cfg.window >= cfg.train_days) {
    throw Error(ErrorCode::InsufficientData, "training window longer than train_days");
  }

  Forecasts out;
  out.asset_ids = raw.asset_ids;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    try {
      forecast_fold(raw, realised, fwd, folds[k], k, cfg, out);
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(k) + ": " + e.message());
    }
  }
  return out;
}

BacktestResult simulate(const MarketPanel& panel, const Forecasts& forecasts, const BacktestConfig& cfg) {
  cfg.validate();
  const ReturnPanel realised = asset_returns(panel);
  const std::size_t n_assets = realised.num_assets();
  if (forecasts.asset_ids != realised.asset_ids) {
    throw Error(ErrorCode::LengthMismatch, "forecasts were made for a different universe");
  }
  if (forecasts.decision_days.empty()) {
    throw Error(ErrorCode::InsufficientData, "no out-of-sample days");
  }

  std::vector<double> market_ret(realised.num_days());
  const auto market = log_returns(std::span<const double>(panel.market.close));
  std::copy(market.begin(), market.end(), market_ret.begin());
  const auto labels = classify_regimes(market_ret, cfg.regime_lookback, cfg.regime_threshold);

  BacktestResult res;
  res.asset_ids = forecasts.asset_ids;
  res.selected_factors = forecasts.selected_factors;
  res.equity.dates.push_back(realised.calendar[forecasts.decision_days.front()]);
  res.equity.equity.push_back(1.0);

  double equity = 1.0;
  double peak = 1.0;
  std::vector<double> prev(n_assets, 0.0);
  std::vector<double> unscaled_history;
  for (std::size_t i = 0; i < forecasts.decision_days.size(); ++i) {
    const std::size_t t = forecasts.decision_days[i];
    const std::size_t u = t + 1;
    const auto& preds = forecasts.predictions[i];

    const auto base = construct_portfolio(preds, res.asset_ids, cfg.top_fraction);
    double realized_vol = 0.0;
    if (unscaled_history.size() >= cfg.vol_window) {
      const std::span<const double> tail(unscaled_history.data() + unscaled_history.size() - cfg.vol_window,
                                         cfg.vol_window);
      realized_vol = annualized_volatility(tail);
    }
    const double drawdown = 1.0 - equity / peak;
    const auto weights = apply_risk_constraints(base, realized_vol, drawdown, cfg);

    std::vector<double> day_returns(n_assets);
    double gross = 0.0;
    double unscaled = 0.0;
    double turnover = 0.0;
    for (std::size_t a = 0; a < n_assets; ++a) {
      day_returns[a] = realised.at(u, a);
      const double simple = std::expm1(day_returns[a]);
      gross += weights[a] * simple;
      unscaled += base[a] * simple;
      turnover += std::abs(weights[a] - prev[a]);
    }
    const double port = gross - cfg.cost_rate * turnover;
    equity *= 1.0 + port;
    peak = std::max(peak, equity);
    unscaled_history.push_back(unscaled);
    prev = weights;

    res.decision_dates.push_back(realised.calendar[t]);
    res.weights_history.push_back(weights);
    res.return_dates.push_back(realised.calendar[u]);
    res.daily_returns.push_back(std::log1p(port));
    res.predictions.push_back(preds);
    res.realized.push_back(std::move(day_returns));
    res.regimes.push_back(labels[u]);
    res.equity.dates.push_back(realised.calendar[u]);
    res.equity.equity.push_back(equity);
  }

  res.overall = risk_report(res.daily_returns, cfg.risk_free);
  for (Regime r : kRegimes) {
    std::vector<double> sub;
    for (std::size_t i = 0; i < res.daily_returns.size(); ++i) {
      if (res.regimes[i] == r) {
        sub.push_back(res.daily_returns[i]);
      }
    }
    if (sub.size() >= 20) {
      res.per_regime.emplace(r, risk_report(sub, cfg.risk_free));
    }
  }
  return res;
}

BacktestResult walk_forward(const MarketPanel& panel, const BacktestConfig& cfg) {
  return simulate(panel, forecast_walk_forward(panel, cfg), cfg);
}

HoldoutScore holdout_comparison(const MarketPanel& panel, const BacktestConfig& cfg, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "train_fraction must lie in (0, 1)");
  }
  cfg.train_cfg.validate();
  cfg.screen.validate();
  if (!panel.complete()) {
    throw Error(ErrorCode::InvalidConfig, "holdout_comparison needs a cleaned panel");
  }
  const FactorPanel raw = compute_factors(panel);
  const ReturnPanel realised = asset_returns(panel);
  const ReturnPanel fwd = shift_forward(realised);
  const std::size_t days = raw.num_days();
  const auto split = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(days)));
  const std::size_t window = cfg.train_cfg.window;
  if (split <= window + 2 || days - split < 2) {
    throw Error(ErrorCode::InsufficientData, "split leaves too few days on one side");
  }

  const DayRange train{0, split};
  const FactorPanel z = standardize(raw.select(varying_factors(raw, train)), train);
  const ScreenResult screen = screen_factors(z, fwd, DayRange{0, split - 1}, cfg.screen);
  const FactorPanel x = z.select(screen.selected);

  const LinearModel linear = fit_ols(x, fwd, DayRange{0, split - 1});
  lstm::TrainConfig tc = cfg.train_cfg;
  tc.seed = cfg.seed;
  const auto trained = lstm::train(lstm::make_windows(x, realised, window, train), tc);

  // Windows ending at split - 1 or later target the held-out days.
  const auto test = lstm::make_windows(x, realised, window, DayRange{split - window, days});
  const auto lstm_preds = lstm::predict_all(trained.params, test);
  std::vector<double> linear_preds(test.size());
  std::vector<double> targets(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    linear_preds[i] = predict_linear(linear, x.row(test[i].last_input_day, test[i].asset));
    targets[i] = test[i].target;
  }

  HoldoutScore out;
  out.linear_mse = lstm::mse_loss(linear_preds, targets);
  out.lstm_mse = lstm::mse_loss(lstm_preds, targets);
  out.train_days = split;
  out.test_samples = test.size();
  out.selected_factors = screen.selected;
  return out;
}

// ---------------------------------------------------------------------------
// Reports

ComparisonTable compare_models(std::span<const NamedResult> results) {
  ComparisonTable table;
  if (results.empty()) {
    return table;
  }
  const auto& dates = results.front().result->return_dates;
  for (const auto& nr : results) {
    if (nr.result->return_dates != dates) {
      throw Error(ErrorCode::CalendarMismatch, "'" + nr.name + "' covers different days than '" +
                                                   results.front().name + "'");
    }
    table.models.push_back(nr.name);
    table.overall.push_back(nr.result->overall);
  }
  for (Regime r : kRegimes) {
    std::vector<std::optional<RiskReport>> row;
    bool any = false;
    for (const auto& nr : results) {
      const auto it = nr.result->per_regime.find(r);
      if (it != nr.result->per_regime.end()) {
        row.emplace_back(it->second);
        any = true;
      } else {
        row.emplace_back(std::nullopt);
      }
    }
    if (any) {
      table.per_regime.emplace(r, std::move(row));
    }
  }
  return table;
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s = buf;
  // "-0.00" reads as a loss that is not there.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

std::string sharpe_cell(const RiskReport& r) { return r.sharpe ? fixed(*r.sharpe, 2) : "n/a"; }

std::string pad(const std::string& s, std::size_t width, bool left_align) {
  if (s.size() >= width) {
    return s;
  }
  const std::string fill(width - s.size(), ' ');
  return left_align ? s + fill : fill + s;
}

// The first `labels` columns are left-aligned, numbers right-aligned.
std::string render_block(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                         std::size_t labels) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) {
        s += " | ";
      }
      s += pad(cells[c], width[c], c < labels);
    }
    while (!s.empty() && s.back() == ' ') {
      s.pop_back();
    }
    return s + '\n';
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) {
    total += w;
  }
  out += std::string(total + 3 * (width.size() - 1), '-') + '\n';
  for (const auto& row : rows) {
    out += line(row);
  }
  return out;
}

}  // namespace

std::vector<std::string> overall_cells(const RiskReport& report) {
  return {fixed(report.max_drawdown * 100.0, 1) + "%", sharpe_cell(report), fixed(report.var95 * 100.0, 2) + "%"};
}

std::vector<std::string> regime_cells(const RiskReport& report) {
  return {fixed(report.mean_daily_return * 100.0, 3), fixed(report.max_drawdown * 100.0, 2), sharpe_cell(report),
          fixed(report.var95 * 100.0, 2)};
}

std::string join_cells(std::span<const std::string> cells, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) {
      out += sep;
    }
    out += cells[i];
  }
  return out;
}

std::string render_comparison_text(const ComparisonTable& table) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t m = 0; m < table.models.size(); ++m) {
    std::vector<std::string> row{table.models[m]};
    for (auto& c : overall_cells(table.overall[m])) {
      row.push_back(std::move(c));
    }
    rows.push_back(std::move(row));
  }
  std::string out = "Risk control indicators\n";
  out += render_block({"model", "Max Drawdown", "Sharpe Ratio", "VaR (95%)"}, rows, 1);

  rows.clear();
  for (const auto& [regime, reports] : table.per_regime) {
    for (std::size_t m = 0; m < table.models.size(); ++m) {
      std::vector<std::string> row{std::string(to_string(regime)), table.models[m]};
      const auto cells = reports[m] ? regime_cells(*reports[m]) : std::vector<std::string>(4, "n/a");
      row.insert(row.end(), cells.begin(), cells.end());
      rows.push_back(std::move(row));
    }
  }
  if (!rows.empty()) {
    out += "\nPerformance by market environment\n";
    out += render_block({"market environment", "model", "Average daily return (%)", "Max Drawdown (%)",
                         "Sharpe Ratio", "VaR (95%) (%)"},
                        rows, 2);
  }
  return out;
}

std::string render_comparison_csv(const ComparisonTable& table) {
  std::string out = "section,regime,model,mean_daily_return,max_drawdown,sharpe,var95\n";
  auto row = [&](const std::string& section, const std::string& regime, const std::string& model,
                 const RiskReport& r) {
    out += section + ',' + regime + ',' + model + ',' + csv::format_double(r.mean_daily_return) + ',' +
           csv::format_double(r.max_drawdown) + ',' + (r.sharpe ? csv::format_double(*r.sharpe) : "") + ',' +
           csv::format_double(r.var95) + '\n';
  };
  for (std::size_t m = 0; m < table.models.size(); ++m) {
    row("overall", "", table.models[m], table.overall[m]);
  }
  for (const auto& [regime, reports] : table.per_regime) {
    for (std::size_t m = 0; m < table.models.size(); ++m) {
      if (reports[m]) {
        row("regime", std::string(to_string(regime)), table.models[m], *reports[m]);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimisation-degree sweep

BacktestConfig sweep_rung_config(const BacktestConfig& base, int degree) {
  if (degree < 0 || degree > kMaxSweepDegree) {
    throw Error(ErrorCode::InvalidConfig, "sweep degree must lie in [0, " + std::to_string(kMaxSweepDegree) + "]");
  }
  BacktestConfig cfg = base;
  cfg.model_kind = degree == 0 ? ModelKind::Linear : ModelKind::Lstm;
  cfg.vol_targeting = degree >= 2;
  cfg.drawdown_control = degree >= 3;
  if (degree >= 4) {
    cfg.train_cfg.epochs = base.train_cfg.epochs * 2;
  }
  return cfg;
}

std::vector<SweepRow> optimization_sweep(const MarketPanel& panel, const BacktestConfig& base,
                                         std::span<const int> degrees) {
  if (degrees.empty()) {
    throw Error(ErrorCode::InvalidConfig, "sweep ladder is empty");
  }
  std::map<std::pair<ModelKind, std::size_t>, Forecasts> cache;
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    try {
      const BacktestConfig cfg = sweep_rung_config(base, degrees[i]);
      const auto key = std::make_pair(cfg.model_kind, cfg.model_kind == ModelKind::Lstm ? cfg.train_cfg.epochs : 0);
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache.emplace(key, forecast_walk_forward(panel, cfg)).first;
      }
      const BacktestResult res = simulate(panel, it->second, cfg);
      rows.push_back(SweepRow{degrees[i], res.overall.ann_return, res.overall.sharpe, res.overall.volatility,
                              res.overall.max_drawdown});
    } catch (const Error& e) {
      throw Error(e.code(), "rung " + std::to_string(degrees[i]) + ": " + e.message());
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string out = "degree,ann_return,sharpe\n";
  for (const auto& r : rows) {
    out += std::to_string(r.degree) + ',' + csv::format_double(r.ann_return) + ',' +
           (r.sharpe ? csv::format_double(*r.sharpe) : "") + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run directory

std::string report_csv(std::span<const NamedResult> results) {
  std::string out = std::string(kRiskReportHeader) + '\n';
  for (const auto& nr : results) {
    out += risk_report_csv_row(nr.name, nr.result->overall) + '\n';
    for (const auto& [regime, report] : nr.result->per_regime) {
      out += risk_report_csv_row(nr.name + ":" + std::string(to_string(regime)), report) + '\n';
    }
  }
  return out;
}

std::string regimes_csv(const BacktestResult& result) {
  std::string out = "date,label\n";
  for (std::size_t i = 0; i < result.return_dates.size(); ++i) {
    out += result.return_dates[i].to_iso() + ',' +
           (result.regimes[i] ? std::string(to_string(*result.regimes[i])) : std::string()) + '\n';
  }
  return out;
}

std::string equity_csv(std::span<const NamedResult> results) {
  std::string out = "date";
  for (const auto& nr : results) {
    out += ',' + nr.name;
  }
  out += '\n';
  if (results.empty()) {
    return out;
  }
  const auto& curve = results.front().result->equity;
  for (const auto& nr : results) {
    if (nr.result->equity.dates != curve.dates) {
      throw Error(ErrorCode::CalendarMismatch, "'" + nr.name + "' covers different days than '" +
                                                   results.front().name + "'");
    }
  }
  for (std::size_t i = 0; i < curve.dates.size(); ++i) {
    out += curve.dates[i].to_iso();
    for (const auto& nr : results) {
      out += ',' + csv::format_double(nr.result->equity.equity[i]);
    }
    out += '\n';
  }
  return out;
}

void write_run_directory(const BacktestResult& result, const std::string& strategy,
                         const std::filesystem::path& dir) {
  const NamedResult self{strategy, &result};
  std::string equity = equity_csv(std::span<const NamedResult>(&self, 1));
  equity.replace(0, equity.find('\n'), "date,equity");
  csv::write_file(dir / "equity.csv", equity);

  std::string weights = "date,asset_id,weight\n";
  for (std::size_t i = 0; i < result.weights_history.size(); ++i) {
    const std::string date = result.decision_dates[i].to_iso();
    for (std::size_t a = 0; a < result.asset_ids.size(); ++a) {
      weights += date + ',' + result.asset_ids[a] + ',' + csv::format_double(result.weights_history[i][a]) + '\n';
    }
  }
  csv::write_file(dir / "weights.csv", weights);
  csv::write_file(dir / "report.csv", report_csv(std::span<const NamedResult>(&self, 1)));
  csv::write_file(dir / "regimes.csv", regimes_csv(result));
}

}  // namespace factorbt
