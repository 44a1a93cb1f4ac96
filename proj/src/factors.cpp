#include "factorbt/factors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "factorbt/csv.hpp"
#include "factorbt/error.hpp"
#include "factorbt/stats.hpp"

namespace factorbt {

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(x.size()) + " vs " + std::to_string(y.size()) + " values");
  }
  if (x.size() < 3) {
    throw Error(ErrorCode::LengthMismatch, "need at least 3 paired values");
  }
  const double mx = stats::mean(x);
  const double my = stats::mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "correlation undefined for a constant series");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> forward_targets(const ReturnPanel& fwd, DayRange range) {
  auto y = fwd.pooled(range);
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::LengthMismatch, "forward returns undefined inside the range");
    }
  }
  return y;
}

void check_range(const FactorPanel& panel, const ReturnPanel& fwd, DayRange range) {
  if (fwd.num_days() != panel.num_days() || fwd.num_assets() != panel.num_assets()) {
    throw Error(ErrorCode::LengthMismatch, "factor and return panels differ in shape");
  }
  if (range.end > panel.num_days() || range.size() == 0) {
    throw Error(ErrorCode::LengthMismatch, "day range outside the panel");
  }
}

}  // namespace

double information_coefficient(std::span<const double> factor, std::span<const double> fwd_returns) {
  return pearson(factor, fwd_returns);
}

double rank_ic(std::span<const double> factor, std::span<const double> fwd_returns) {
  if (factor.size() != fwd_returns.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(factor.size()) + " vs " + std::to_string(fwd_returns.size()) + " values");
  }
  return pearson(stats::midranks(factor), stats::midranks(fwd_returns));
}

void ScreenConfig::validate() const {
  if (!(min_abs_ic >= 0.0 && min_abs_ic <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "min_abs_ic must lie in [0, 1]");
  }
  if (!(max_pairwise_corr > 0.0 && max_pairwise_corr < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "max_pairwise_corr must lie in (0, 1)");
  }
}

ScreenResult screen_factors(const FactorPanel& panel, const ReturnPanel& fwd_returns, DayRange range,
                            const ScreenConfig& cfg) {
  cfg.validate();
  check_range(panel, fwd_returns, range);
  const auto y = forward_targets(fwd_returns, range);
  const std::size_t n = panel.num_factors();

  ScreenResult result;
  auto& st = result.stats;
  st.factor_names = panel.factor_names;
  std::vector<std::vector<double>> columns;
  columns.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    columns.push_back(panel.pooled(k, range));
    st.ic.push_back(information_coefficient(columns.back(), y));
    st.rank_ic.push_back(rank_ic(columns.back(), y));
  }
  st.pairwise_corr.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    st.pairwise_corr[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = pearson(columns[i], columns[j]);
      st.pairwise_corr[i * n + j] = c;
      st.pairwise_corr[j * n + i] = c;
    }
  }

  // Strongest |IC| first; equal |IC| keeps the earlier factor.
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(st.ic[k]) >= cfg.min_abs_ic) {
      order.push_back(k);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(st.ic[a]) > std::abs(st.ic[b]); });
  std::vector<bool> keep(n, false);
  std::vector<std::size_t> kept;
  for (std::size_t k : order) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](std::size_t j) {
      return std::abs(st.corr(k, j)) > cfg.max_pairwise_corr;
    });
    if (!clash) {
      keep[k] = true;
      kept.push_back(k);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (keep[k]) {
      result.selected.push_back(panel.factor_names[k]);
    }
  }
  if (result.selected.empty()) {
    throw Error(ErrorCode::NoFactorsSurvive, "no factor passed the IC and correlation screens");
  }
  return result;
}

LinearModel fit_ols(std::span<const double> x, std::span<const double> y,
                    const std::vector<std::string>& names) {
  const std::size_t n = names.size();
  const std::size_t rows = y.size();
  if (x.size() != rows * n) {
    throw Error(ErrorCode::LengthMismatch, "design matrix does not match the return count");
  }
  if (rows <= n + 1) {
    throw Error(ErrorCode::TooShort, "need more than n + 1 observations");
  }
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n + 1));
  Eigen::VectorXd target(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    design(ri, 0) = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      design(ri, static_cast<Eigen::Index>(k + 1)) = x[r * n + k];
    }
    target(ri) = y[r];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  qr.compute(design);
  if (qr.rank() < design.cols()) {
    std::vector<std::string> offending;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < design.cols(); ++i) {
      const auto col = static_cast<std::size_t>(perm(i));
      offending.push_back(col == 0 ? std::string("intercept") : names[col - 1]);
    }
    std::string msg = "collinear columns:";
    for (const auto& c : offending) {
      msg += " " + c;
    }
    throw RankDeficientError(std::move(offending), msg);
  }
  const Eigen::VectorXd coef = qr.solve(target);
  const Eigen::VectorXd resid = target - design * coef;

  LinearModel model;
  model.alpha = coef(0);
  model.betas.assign(coef.data() + 1, coef.data() + coef.size());
  model.residuals.assign(resid.data(), resid.data() + resid.size());
  model.factor_names = names;
  return model;
}

LinearModel fit_ols(const FactorPanel& panel, const ReturnPanel& fwd_returns, DayRange fit_range) {
  check_range(panel, fwd_returns, fit_range);
  const auto y = forward_targets(fwd_returns, fit_range);
  const std::size_t n = panel.num_factors();
  const std::size_t stride = panel.num_assets() * n;
  std::span<const double> x(panel.values.data() + fit_range.begin * stride, fit_range.size() * stride);
  return fit_ols(x, y, panel.factor_names);
}

double predict_linear(const LinearModel& model, std::span<const double> factors) {
  if (factors.size() != model.betas.size()) {
    throw Error(ErrorCode::LengthMismatch, "model has " + std::to_string(model.betas.size()) +
                                               " betas, got " + std::to_string(factors.size()) + " factors");
  }
  double y = model.alpha;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    y += model.betas[i] * factors[i];
  }
  return y;
}

void write_factor_report(std::ostream& out, const ScreenResult& result) {
  const auto& st = result.stats;
  out << "factor,ic,rank_ic,selected\n";
  for (std::size_t k = 0; k < st.factor_names.size(); ++k) {
    const bool sel = std::find(result.selected.begin(), result.selected.end(), st.factor_names[k]) !=
                     result.selected.end();
    out << st.factor_names[k] << ',' << csv::format_double(st.ic[k]) << ','
        << csv::format_double(st.rank_ic[k]) << ',' << (sel ? "true" : "false") << '\n';
  }
}

void write_correlation_matrix(std::ostream& out, const FactorStats& stats) {
  const std::size_t n = stats.factor_names.size();
  out << "factor";
  for (const auto& name : stats.factor_names) {
    out << ',' << name;
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << stats.factor_names[i];
    for (std::size_t j = 0; j < n; ++j) {
      out << ',' << csv::format_double(stats.corr(i, j));
    }
    out << '\n';
  }
}

}  // namespace factorbt
