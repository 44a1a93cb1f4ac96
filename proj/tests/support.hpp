#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "factorbt/marketdata.hpp"
#include "factorbt/rng.hpp"
#include "factorbt/synth.hpp"

namespace factorbt::testing {

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("factorbt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Complete panel with one industry. Every column carries bounded uniform
// noise, so median +/- 5 MAD never clips anything.
inline MarketPanel random_panel(std::size_t assets, std::size_t days, std::uint64_t seed) {
  Rng rng(seed);
  MarketPanel p;
  Date d = Date::from_iso("2020-01-01");
  for (std::size_t t = 0; t < days; ++t) {
    d = next_business_day(d);
    p.calendar.push_back(d);
  }
  auto walk = [&](double start, double vol) {
    std::vector<double> c(days);
    c[0] = start;
    for (std::size_t t = 1; t < days; ++t) {
      c[t] = c[t - 1] * std::exp(vol * rng.uniform(-1.0, 1.0));
    }
    return c;
  };
  p.market = {"MARKET", walk(1000.0, 0.01)};
  p.industries.push_back({"TECH", walk(500.0, 0.012)});
  for (std::size_t a = 0; a < assets; ++a) {
    AssetRecord r;
    r.asset_id = "TECH.A" + std::to_string(a);
    r.industry = "TECH";
    r.close = walk(50.0 + static_cast<double>(a), 0.02);
    for (std::size_t t = 0; t < days; ++t) {
      r.volume.push_back(std::floor(1e6 * (1.0 + rng.uniform())));
      r.pe_ratio.push_back(15.0 + 3.0 * rng.uniform(-1.0, 1.0));
      r.pb_ratio.push_back(2.0 + 0.4 * rng.uniform(-1.0, 1.0));
    }
    p.assets.push_back(std::move(r));
  }
  return p;
}

// Synthetic configuration whose returns follow the planted linear model with
// no market exposure and no noise.
inline SynthConfig noiseless_config(std::size_t assets, std::size_t days, double alpha, double beta_pe,
                                    double beta_pb) {
  SynthConfig cfg;
  cfg.assets = assets;
  cfg.days = days;
  cfg.noise = 0.0;
  cfg.loadings.alpha = alpha;
  cfg.loadings.betas = {0.0, 0.0, beta_pe, beta_pb, 0.0};
  cfg.loadings.nonlinear = 0.0;
  cfg.loadings.market = 0.0;
  return cfg;
}

}  // namespace factorbt::testing
