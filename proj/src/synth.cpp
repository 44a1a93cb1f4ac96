#include "factorbt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "factorbt/error.hpp"
#include "factorbt/rng.hpp"

namespace factorbt {

namespace {

constexpr double kDriverPersistence = 0.95;
constexpr double kDriverClamp = 4.0;
constexpr double kIndustryVolRatio = 0.5;

std::string asset_name(std::size_t i, std::size_t industries) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "S%zu.A%03zu", i % industries, i);
  return buf;
}

// Stationary AR(1) path with unit variance, clamped to +/- kDriverClamp.
std::vector<double> driver_path(Rng& rng, std::size_t days) {
  const double shock = std::sqrt(1.0 - kDriverPersistence * kDriverPersistence);
  std::vector<double> z(days);
  double prev = rng.normal();
  for (std::size_t t = 0; t < days; ++t) {
    if (t > 0) {
      prev = kDriverPersistence * prev + shock * rng.normal();
    }
    z[t] = std::clamp(prev, -kDriverClamp, kDriverClamp);
  }
  return z;
}

std::vector<double> integrate(const std::vector<double>& log_returns, double start) {
  std::vector<double> close(log_returns.size() + 1);
  close[0] = start;
  for (std::size_t t = 0; t < log_returns.size(); ++t) {
    close[t + 1] = close[t] * std::exp(log_returns[t]);
  }
  return close;
}

}  // namespace

void SynthConfig::validate() const {
  if (assets == 0 || days < 2 || industries == 0) {
    throw Error(ErrorCode::InvalidConfig, "assets, industries must be positive and days >= 2");
  }
  if (regimes.empty()) {
    throw Error(ErrorCode::InvalidConfig, "regime schedule is empty");
  }
  for (const auto& r : regimes) {
    if (r.length == 0 || !(r.vol > 0.0) || !std::isfinite(r.drift)) {
      throw Error(ErrorCode::InvalidConfig, "regime needs positive length and volatility");
    }
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw Error(ErrorCode::InvalidConfig, "noise must be non-negative");
  }
}

SyntheticMarket synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const std::size_t days = cfg.days;
  const std::size_t steps = days - 1;

  // Regime of each return day, cycling through the schedule.
  std::vector<const RegimeSpec*> schedule;
  schedule.reserve(steps);
  while (schedule.size() < steps) {
    for (const auto& r : cfg.regimes) {
      for (std::size_t i = 0; i < r.length && schedule.size() < steps; ++i) {
        schedule.push_back(&r);
      }
    }
  }

  SyntheticMarket out;
  auto& panel = out.panel;
  panel.calendar.resize(days);
  panel.calendar[0] = Date::from_iso("2010-01-04");
  for (std::size_t t = 1; t < days; ++t) {
    panel.calendar[t] = next_business_day(panel.calendar[t - 1]);
  }
  for (const auto* r : schedule) {
    out.regimes.push_back(r->kind);
  }

  std::vector<double> market(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    market[t] = schedule[t]->drift + schedule[t]->vol * rng.normal();
  }
  panel.market = IndexRecord{"MARKET", integrate(market, 1000.0)};
  for (std::size_t j = 0; j < cfg.industries; ++j) {
    std::vector<double> ind(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      ind[t] = market[t] + kIndustryVolRatio * schedule[t]->vol * rng.normal();
    }
    panel.industries.push_back(IndexRecord{"S" + std::to_string(j), integrate(ind, 1000.0)});
  }
  const auto market_ret = log_returns(std::span<const double>(panel.market.close));
  std::vector<std::vector<double>> industry_ret;
  for (const auto& idx : panel.industries) {
    industry_ret.push_back(log_returns(std::span<const double>(idx.close)));
  }

  auto& factors = out.factors;
  factors.factor_names.assign(kFactorNames.begin(), kFactorNames.end());
  factors.calendar.assign(panel.calendar.begin() + 1, panel.calendar.end());
  factors.values.assign(steps * cfg.assets * kFactorNames.size(), 0.0);
  for (std::size_t a = 0; a < cfg.assets; ++a) {
    factors.asset_ids.push_back(asset_name(a, cfg.industries));
  }

  const auto& ld = cfg.loadings;
  for (std::size_t a = 0; a < cfg.assets; ++a) {
    const std::size_t industry = a % cfg.industries;
    const auto z_pe = driver_path(rng, days);
    const auto z_pb = driver_path(rng, days);
    const auto z_vol = driver_path(rng, days);

    AssetRecord rec;
    rec.asset_id = factors.asset_ids[a];
    rec.industry = panel.industries[industry].index_id;
    rec.pe_ratio.resize(days);
    rec.pb_ratio.resize(days);
    rec.volume.resize(days);
    for (std::size_t t = 0; t < days; ++t) {
      rec.pe_ratio[t] = kSynthFactorCenter[2] + kSynthFactorScale[2] * z_pe[t];
      rec.pb_ratio[t] = kSynthFactorCenter[3] + kSynthFactorScale[3] * z_pb[t];
      rec.volume[t] = std::expm1(kSynthFactorCenter[4] + kSynthFactorScale[4] * z_vol[t]);
    }

    // Factor record for return day d (calendar day d + 1).
    for (std::size_t d = 0; d < steps; ++d) {
      factors.at(d, a, 0) = market_ret[d];
      factors.at(d, a, 1) = industry_ret[industry][d];
      factors.at(d, a, 2) = rec.pe_ratio[d + 1];
      factors.at(d, a, 3) = rec.pb_ratio[d + 1];
      factors.at(d, a, 4) = std::log1p(rec.volume[d + 1]);
    }

    std::vector<double> returns(steps);
    for (std::size_t d = 0; d < steps; ++d) {
      double r = ld.market * market_ret[d] + cfg.noise * rng.normal();
      if (d > 0) {
        double signal = ld.alpha;
        for (std::size_t k = 0; k < kFactorNames.size(); ++k) {
          signal += ld.betas[k] * synth_scaled(k, factors.at(d - 1, a, k));
        }
        const double s_pe = synth_scaled(2, factors.at(d - 1, a, 2));
        signal += ld.nonlinear * (s_pe * s_pe - 1.0);
        r += signal;
      }
      returns[d] = r;
    }
    rec.close = integrate(returns, 100.0);
    panel.assets.push_back(std::move(rec));
  }
  return out;
}

}  // namespace factorbt
