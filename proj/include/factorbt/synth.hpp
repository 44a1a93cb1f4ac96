#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "factorbt/marketdata.hpp"
#include "factorbt/regime.hpp"

namespace factorbt {

struct RegimeSpec {
  Regime kind = Regime::Shock;
  std::size_t length = 250;  // days
  double drift = 0.0;        // mean daily log return of the market index
  double vol = 0.01;         // daily std of the market index log return
};

/// Factor -> next-day return relation planted in every asset.
///
///   R[t+1] = alpha + sum_k betas[k] * s_k(t) + nonlinear * (s_pe(t)^2 - 1)
///            + market * m[t+1] + noise * eps[t+1]
///
/// where s_k = (F_k - kSynthFactorCenter[k]) / kSynthFactorScale[k] is the
/// scaled value of factor k (order of kFactorNames) and m is the market index
/// log return. The first return of each asset carries no factor term.
struct Loadings {
  double alpha = 0.0;
  std::array<double, 5> betas = {0.0, 0.0, 0.0005, -0.00025, 0.0};
  double nonlinear = 0.002;
  double market = 1.0;
};

inline constexpr std::array<double, 5> kSynthFactorCenter = {0.0, 0.0, 15.0, 2.0, 13.8};
inline constexpr std::array<double, 5> kSynthFactorScale = {0.01, 0.01, 3.0, 0.4, 0.5};

struct SynthConfig {
  std::size_t assets = 30;
  std::size_t days = 1500;
  std::uint64_t seed = 42;
  std::size_t industries = 3;
  /// Cycled until `days` are covered.
  std::vector<RegimeSpec> regimes = {
      {Regime::Bull, 250, 0.0015, 0.012},
      {Regime::Bear, 250, -0.0015, 0.02},
      {Regime::Shock, 250, 0.0, 0.015},
  };
  Loadings loadings;
  double noise = 0.02;

  /// Throws InvalidConfig on non-positive counts or volatilities.
  void validate() const;
};

struct SyntheticMarket {
  MarketPanel panel;
  /// The factor values the generator planted; equals compute_factors(panel).
  FactorPanel factors;
  /// Configured regime of every return day (the factor calendar).
  std::vector<Regime> regimes;
};

/// Pure function of (cfg, seed); cfg.seed is ignored in favour of `seed`.
SyntheticMarket synth_generate(const SynthConfig& cfg, std::uint64_t seed);

/// Scaled factor value s_k used by the generator.
inline double synth_scaled(std::size_t factor, double value) {
  return (value - kSynthFactorCenter[factor]) / kSynthFactorScale[factor];
}

}  // namespace factorbt
