#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "factorbt/marketdata.hpp"

namespace factorbt {

/// Pearson correlation of `factor` with `fwd_returns`. The caller aligns the
/// two so that fwd_returns[i] is the return that follows factor[i].
/// Throws LengthMismatch (unequal or < 3 values) or ZeroVariance.
double information_coefficient(std::span<const double> factor, std::span<const double> fwd_returns);

/// Spearman correlation: Pearson correlation of the midranks.
double rank_ic(std::span<const double> factor, std::span<const double> fwd_returns);

struct FactorStats {
  std::vector<std::string> factor_names;
  std::vector<double> ic;
  std::vector<double> rank_ic;
  std::vector<double> pairwise_corr;  // n x n, row-major

  double corr(std::size_t i, std::size_t j) const { return pairwise_corr[i * factor_names.size() + j]; }
};

struct ScreenConfig {
  double min_abs_ic = 0.02;
  double max_pairwise_corr = 0.8;

  void validate() const;
};

struct ScreenResult {
  std::vector<std::string> selected;  // input order
  FactorStats stats;
};

/// IC screen followed by a collinearity screen. ICs pool every asset-day in
/// `range`; `fwd_returns` must be finite there (see shift_forward).
/// Throws NoFactorsSurvive when nothing is left.
ScreenResult screen_factors(const FactorPanel& panel, const ReturnPanel& fwd_returns, DayRange range,
                            const ScreenConfig& cfg);

struct LinearModel {
  double alpha = 0.0;
  std::vector<double> betas;
  std::vector<double> residuals;
  std::vector<std::string> factor_names;
};

/// Least squares of y on [1, X] through column-pivoted Householder QR.
/// `x` is row-major with `names.size()` columns.
LinearModel fit_ols(std::span<const double> x, std::span<const double> y,
                    const std::vector<std::string>& names);

/// Pools every asset-day of `fit_range` (day-major, then asset).
LinearModel fit_ols(const FactorPanel& panel, const ReturnPanel& fwd_returns, DayRange fit_range);

/// alpha + sum(beta_i * factors_i). Throws LengthMismatch.
double predict_linear(const LinearModel& model, std::span<const double> factors);

/// `factor,ic,rank_ic,selected`
void write_factor_report(std::ostream& out, const ScreenResult& result);
/// Square correlation matrix with a header row and a leading name column.
void write_correlation_matrix(std::ostream& out, const FactorStats& stats);

}  // namespace factorbt
