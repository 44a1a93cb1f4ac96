#include <algorithm>
#include <fstream>
#include <sstream>

#include "factorbt/app.hpp"
#include "factorbt/csv.hpp"
#include "json.hpp"

namespace factorbt::app {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorCode::InvalidConfig, msg);
}

std::string join_path(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) {
    config_error("'" + where + "' must be an object");
  }
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error("unknown key '" + join_path(where, key) + "'");
    }
  }
}

void read(const json& obj, std::string_view key, const std::string& where, double& dst) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    return;
  }
  if (!it->is_number()) {
    config_error("'" + join_path(where, key) + "' must be a number");
  }
  dst = it->get<double>();
}

void read(const json& obj, std::string_view key, const std::string& where, std::size_t& dst) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    return;
  }
  if (!it->is_number_unsigned()) {
    config_error("'" + join_path(where, key) + "' must be a non-negative integer");
  }
  dst = it->get<std::size_t>();
}

void read(const json& obj, std::string_view key, const std::string& where, bool& dst) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    return;
  }
  if (!it->is_boolean()) {
    config_error("'" + join_path(where, key) + "' must be true or false");
  }
  dst = it->get<bool>();
}

std::string read_string(const json& obj, std::string_view key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    config_error("missing key '" + join_path(where, key) + "'");
  }
  if (!it->is_string()) {
    config_error("'" + join_path(where, key) + "' must be a string");
  }
  return it->get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

RegimeSpec parse_regime(const json& j, const std::string& where) {
  require_object(j, where);
  check_keys(j, {"kind", "length", "drift", "vol"}, where);
  RegimeSpec r;
  const auto kind = regime_from_string(read_string(j, "kind", where));
  if (!kind) {
    config_error("'" + where + ".kind' must be bull, bear or shock");
  }
  r.kind = *kind;
  read(j, "length", where, r.length);
  read(j, "drift", where, r.drift);
  read(j, "vol", where, r.vol);
  return r;
}

Loadings parse_loadings(const json& j, const std::string& where) {
  require_object(j, where);
  check_keys(j, {"alpha", "betas", "nonlinear", "market"}, where);
  Loadings l;
  read(j, "alpha", where, l.alpha);
  read(j, "nonlinear", where, l.nonlinear);
  read(j, "market", where, l.market);
  if (const auto it = j.find("betas"); it != j.end()) {
    if (!it->is_array() || it->size() != l.betas.size() ||
        !std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_number(); })) {
      config_error("'" + where + ".betas' must be an array of 5 numbers");
    }
    for (std::size_t k = 0; k < l.betas.size(); ++k) {
      l.betas[k] = (*it)[k].get<double>();
    }
  }
  return l;
}

SynthConfig parse_synth(const json& j, const std::string& where, std::optional<std::uint64_t>& seed) {
  require_object(j, where);
  check_keys(j, {"assets", "days", "seed", "industries", "regimes", "loadings", "noise"}, where);
  SynthConfig s;
  if (const auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) {
      config_error("'" + where + ".seed' must be a non-negative integer");
    }
    seed = it->get<std::uint64_t>();
  }
  read(j, "assets", where, s.assets);
  read(j, "days", where, s.days);
  read(j, "industries", where, s.industries);
  read(j, "noise", where, s.noise);
  if (const auto it = j.find("regimes"); it != j.end()) {
    if (!it->is_array() || it->empty()) {
      config_error("'" + where + ".regimes' must be a non-empty array");
    }
    s.regimes.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      s.regimes.push_back(parse_regime((*it)[i], where + ".regimes[" + std::to_string(i) + "]"));
    }
  }
  if (const auto it = j.find("loadings"); it != j.end()) {
    s.loadings = parse_loadings(*it, where + ".loadings");
  }
  return s;
}

void parse_data(const json& j, const std::filesystem::path& base, RunConfig& cfg) {
  require_object(j, "data");
  check_keys(j, {"synth", "csv"}, "data");
  if (j.contains("synth") == j.contains("csv")) {
    config_error("'data' must name exactly one source: 'synth' or 'csv'");
  }
  if (const auto it = j.find("synth"); it != j.end()) {
    cfg.synth = parse_synth(*it, "data.synth", cfg.synth_seed);
  } else {
    const json& c = j.at("csv");
    require_object(c, "data.csv");
    check_keys(c, {"prices", "index"}, "data.csv");
    cfg.csv = CsvSource{resolve(base, read_string(c, "prices", "data.csv")),
                        resolve(base, read_string(c, "index", "data.csv"))};
  }
}

void parse_backtest(const json& j, BacktestConfig& b) {
  const std::string w = "backtest";
  require_object(j, w);
  check_keys(j,
             {"train_days", "test_days", "top_fraction", "vol_target", "drawdown_limit", "vol_targeting",
              "drawdown_control", "vol_window", "cost_rate", "regime_lookback", "regime_threshold", "risk_free"},
             w);
  read(j, "train_days", w, b.train_days);
  read(j, "test_days", w, b.test_days);
  read(j, "top_fraction", w, b.top_fraction);
  read(j, "vol_target", w, b.vol_target);
  read(j, "drawdown_limit", w, b.drawdown_limit);
  read(j, "vol_targeting", w, b.vol_targeting);
  read(j, "drawdown_control", w, b.drawdown_control);
  read(j, "vol_window", w, b.vol_window);
  read(j, "cost_rate", w, b.cost_rate);
  read(j, "regime_lookback", w, b.regime_lookback);
  read(j, "regime_threshold", w, b.regime_threshold);
  read(j, "risk_free", w, b.risk_free);
}

void parse_train(const json& j, lstm::TrainConfig& t) {
  const std::string w = "train";
  require_object(j, w);
  check_keys(j,
             {"window", "hidden_size", "epochs", "learning_rate", "beta1", "beta2", "adam_eps", "batch_size",
              "grad_clip", "l2"},
             w);
  read(j, "window", w, t.window);
  read(j, "hidden_size", w, t.hidden_size);
  read(j, "epochs", w, t.epochs);
  read(j, "learning_rate", w, t.learning_rate);
  read(j, "beta1", w, t.beta1);
  read(j, "beta2", w, t.beta2);
  read(j, "adam_eps", w, t.adam_eps);
  read(j, "batch_size", w, t.batch_size);
  read(j, "grad_clip", w, t.grad_clip);
  read(j, "l2", w, t.l2);
}

std::vector<ModelKind> parse_model_list(const std::vector<std::string>& names) {
  std::vector<ModelKind> out;
  for (const auto& name : names) {
    const auto kind = model_kind_from_string(name);
    if (!kind) {
      config_error("unknown model '" + name + "' (expected linear or lstm)");
    }
    if (std::find(out.begin(), out.end(), *kind) == out.end()) {
      out.push_back(*kind);
    }
  }
  if (out.empty()) {
    config_error("'models' must name at least one model");
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (synth.has_value() == csv.has_value()) {
    config_error("exactly one data source must be configured");
  }
  const bool uses_lstm = std::find(models.begin(), models.end(), ModelKind::Lstm) != models.end();
  if (!seed && uses_lstm) {
    config_error("missing key 'seed' (required by the lstm model)");
  }
  if (!seed && synth && !synth_seed) {
    config_error("missing key 'seed' (required for synthetic data)");
  }
  if (output.empty()) {
    config_error("missing key 'output' (or pass --out)");
  }
  if (synth) {
    synth->validate();
  }
  if (!(clean.mad_threshold > 0.0)) {
    config_error("'clean.mad_threshold' must be positive");
  }
  BacktestConfig b = backtest;
  b.model_kind = uses_lstm ? ModelKind::Lstm : ModelKind::Linear;
  b.validate();
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  require_object(j, "config");
  check_keys(j, {"data", "clean", "screen", "backtest", "train", "models", "output", "seed"}, "");

  RunConfig cfg;
  if (!j.contains("data")) {
    config_error("missing key 'data'");
  }
  parse_data(j["data"], base_dir, cfg);
  if (const auto it = j.find("clean"); it != j.end()) {
    require_object(*it, "clean");
    check_keys(*it, {"mad_threshold"}, "clean");
    read(*it, "mad_threshold", "clean", cfg.clean.mad_threshold);
  }
  if (const auto it = j.find("screen"); it != j.end()) {
    require_object(*it, "screen");
    check_keys(*it, {"min_abs_ic", "max_pairwise_corr"}, "screen");
    read(*it, "min_abs_ic", "screen", cfg.backtest.screen.min_abs_ic);
    read(*it, "max_pairwise_corr", "screen", cfg.backtest.screen.max_pairwise_corr);
  }
  if (const auto it = j.find("backtest"); it != j.end()) {
    parse_backtest(*it, cfg.backtest);
  }
  if (const auto it = j.find("train"); it != j.end()) {
    parse_train(*it, cfg.backtest.train_cfg);
  }
  if (const auto it = j.find("models"); it != j.end()) {
    if (!it->is_array() || !std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_string(); })) {
      config_error("'models' must be an array of strings");
    }
    cfg.models = parse_model_list(it->get<std::vector<std::string>>());
  }
  if (j.contains("output")) {
    cfg.output = resolve(base_dir, read_string(j, "output", ""));
  }
  if (const auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) {
      config_error("'seed' must be a non-negative integer");
    }
    cfg.seed = it->get<std::uint64_t>();
    cfg.backtest.seed = *cfg.seed;
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

RunConfig resolve_config(const std::filesystem::path& path, const Overrides& overrides) {
  RunConfig cfg = load_run_config(path);
  if (overrides.out) {
    cfg.output = *overrides.out;
  }
  if (overrides.models) {
    std::vector<std::string> names;
    for (auto field : csv::split(*overrides.models)) {
      names.emplace_back(field);
    }
    cfg.models = parse_model_list(names);
  }
  cfg.validate();
  return cfg;
}

}  // namespace factorbt::app
