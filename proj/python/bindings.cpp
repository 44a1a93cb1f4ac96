#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "factorbt/app.hpp"
#include "factorbt/backtest.hpp"
#include "factorbt/factors.hpp"
#include "factorbt/lstm.hpp"
#include "factorbt/market_io.hpp"
#include "factorbt/marketdata.hpp"
#include "factorbt/risk.hpp"
#include "factorbt/rng.hpp"
#include "factorbt/synth.hpp"

namespace py = pybind11;
using namespace factorbt;

namespace {

std::vector<std::string> iso_dates(const std::vector<Date>& dates) {
  std::vector<std::string> out;
  out.reserve(dates.size());
  for (const Date& d : dates) out.push_back(d.to_iso());
  return out;
}

std::vector<std::optional<std::string>> regime_names(const std::vector<std::optional<Regime>>& labels) {
  std::vector<std::optional<std::string>> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l ? std::optional<std::string>(std::string(to_string(*l))) : std::nullopt);
  return out;
}

ModelKind parse_model(const std::string& name) {
  const auto kind = model_kind_from_string(name);
  if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown model '" + name + "'");
  return *kind;
}

py::tuple run_command(const std::string& command, const std::filesystem::path& config,
                      const std::optional<std::filesystem::path>& out_dir, const std::optional<std::string>& models) {
  std::ostringstream out, err;
  const app::Overrides ov{out_dir, models};
  int code = 0;
  if (command == "generate") {
    code = app::cmd_generate(config, ov, out, err);
  } else if (command == "train") {
    code = app::cmd_train(config, ov, out, err);
  } else if (command == "backtest") {
    code = app::cmd_backtest(config, ov, out, err);
  } else if (command == "sweep") {
    code = app::cmd_sweep(config, ov, out, err);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown command '" + command + "'");
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Factor model backtesting with a from-scratch LSTM";

  py::register_exception<Error>(m, "FactorbtError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::module_::import("factorbt._core").attr("FactorbtError");
      py::object exc = type(std::string(e.what()));
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  // Market data
  py::class_<MarketPanel>(m, "MarketPanel")
      .def_property_readonly("dates", [](const MarketPanel& p) { return iso_dates(p.calendar); })
      .def_property_readonly("asset_ids",
                             [](const MarketPanel& p) {
                               std::vector<std::string> ids;
                               for (const auto& a : p.assets) ids.push_back(a.asset_id);
                               return ids;
                             })
      .def_property_readonly("num_days", &MarketPanel::num_days)
      .def("close", [](const MarketPanel& p, std::size_t asset) { return p.assets.at(asset).close; })
      .def_property_readonly("market_close", [](const MarketPanel& p) { return p.market.close; })
      .def("complete", &MarketPanel::complete)
      .def("validate", &MarketPanel::validate);

  m.def("log_returns", [](const std::vector<double>& close) { return log_returns(close); }, py::arg("close"));
  m.def("load_panel", &load_panel, py::arg("prices_csv"), py::arg("index_csv"));
  m.def("save_panel", &save_panel, py::arg("panel"), py::arg("prices_csv"), py::arg("index_csv"));
  m.def(
      "clean", [](const MarketPanel& p, double mad_threshold) { return clean(p, CleanPolicy{mad_threshold}); },
      py::arg("panel"), py::arg("mad_threshold") = 5.0);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("assets", &SynthConfig::assets)
      .def_readwrite("days", &SynthConfig::days)
      .def_readwrite("industries", &SynthConfig::industries)
      .def_readwrite("noise", &SynthConfig::noise)
      .def_property(
          "betas", [](const SynthConfig& c) { return c.loadings.betas; },
          [](SynthConfig& c, const std::array<double, 5>& b) { c.loadings.betas = b; })
      .def_property(
          "nonlinear", [](const SynthConfig& c) { return c.loadings.nonlinear; },
          [](SynthConfig& c, double v) { c.loadings.nonlinear = v; })
      .def_property(
          "market_loading", [](const SynthConfig& c) { return c.loadings.market; },
          [](SynthConfig& c, double v) { c.loadings.market = v; });
  m.def(
      "synth_generate", [](const SynthConfig& cfg, std::uint64_t seed) { return synth_generate(cfg, seed).panel; },
      py::arg("config"), py::arg("seed"));

  // Factors
  m.def(
      "information_coefficient",
      [](const std::vector<double>& f, const std::vector<double>& r) { return information_coefficient(f, r); },
      py::arg("factor"), py::arg("fwd_returns"));
  m.def(
      "rank_ic", [](const std::vector<double>& f, const std::vector<double>& r) { return rank_ic(f, r); },
      py::arg("factor"), py::arg("fwd_returns"));

  py::class_<LinearModel>(m, "LinearModel")
      .def_readonly("alpha", &LinearModel::alpha)
      .def_readonly("betas", &LinearModel::betas)
      .def_readonly("residuals", &LinearModel::residuals)
      .def_readonly("factor_names", &LinearModel::factor_names);
  m.def(
      "fit_ols",
      [](const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
         std::optional<std::vector<std::string>> names) {
        const std::size_t k = rows.empty() ? 0 : rows.front().size();
        std::vector<double> flat;
        flat.reserve(rows.size() * k);
        for (const auto& r : rows) {
          if (r.size() != k) throw Error(ErrorCode::LengthMismatch, "ragged design matrix");
          flat.insert(flat.end(), r.begin(), r.end());
        }
        if (!names) {
          names.emplace();
          for (std::size_t j = 0; j < k; ++j) names->push_back("x" + std::to_string(j));
        }
        return fit_ols(flat, y, *names);
      },
      py::arg("x"), py::arg("y"), py::arg("names") = std::nullopt);

  // LSTM
  m.def(
      "grad_check",
      [](std::size_t hidden, std::size_t inputs, std::size_t window, std::uint64_t seed, double eps) {
        const auto params = lstm::init_params(hidden, inputs, seed);
        Rng rng(seed + 1);
        lstm::Sample s;
        s.inputs = Eigen::MatrixXd(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(inputs));
        for (Eigen::Index r = 0; r < s.inputs.rows(); ++r)
          for (Eigen::Index c = 0; c < s.inputs.cols(); ++c) s.inputs(r, c) = rng.normal();
        s.target = rng.normal();
        return lstm::grad_check(params, s, eps);
      },
      py::arg("hidden"), py::arg("inputs"), py::arg("window"), py::arg("seed"), py::arg("eps") = 1e-5);

  // Risk
  m.def("max_drawdown", [](const std::vector<double>& eq) { return max_drawdown(eq); }, py::arg("equity"));
  m.def(
      "sharpe", [](const std::vector<double>& r, double rf) { return sharpe(r, rf); }, py::arg("returns"),
      py::arg("rf") = 0.0);
  m.def(
      "var_historical", [](const std::vector<double>& r, double c) { return var_historical(r, c); },
      py::arg("returns"), py::arg("confidence") = 0.95);
  py::class_<RiskReport>(m, "RiskReport")
      .def_readonly("max_drawdown", &RiskReport::max_drawdown)
      .def_readonly("sharpe", &RiskReport::sharpe)
      .def_readonly("var95", &RiskReport::var95)
      .def_readonly("volatility", &RiskReport::volatility)
      .def_readonly("ann_return", &RiskReport::ann_return)
      .def_readonly("mean_daily_return", &RiskReport::mean_daily_return)
      .def_readonly("observations", &RiskReport::observations);
  m.def("risk_report", [](const std::vector<double>& r) { return risk_report(r); }, py::arg("returns"));

  // Backtest
  m.def(
      "classify_regimes",
      [](const std::vector<double>& r, std::size_t lookback, double threshold) {
        return regime_names(classify_regimes(r, lookback, threshold));
      },
      py::arg("index_returns"), py::arg("lookback") = 60, py::arg("threshold") = 0.10);

  py::class_<BacktestConfig>(m, "BacktestConfig")
      .def(py::init<>())
      .def_readwrite("train_days", &BacktestConfig::train_days)
      .def_readwrite("test_days", &BacktestConfig::test_days)
      .def_readwrite("top_fraction", &BacktestConfig::top_fraction)
      .def_readwrite("vol_target", &BacktestConfig::vol_target)
      .def_readwrite("drawdown_limit", &BacktestConfig::drawdown_limit)
      .def_readwrite("vol_targeting", &BacktestConfig::vol_targeting)
      .def_readwrite("drawdown_control", &BacktestConfig::drawdown_control)
      .def_readwrite("seed", &BacktestConfig::seed)
      .def_property(
          "model", [](const BacktestConfig& c) { return std::string(to_string(c.model_kind)); },
          [](BacktestConfig& c, const std::string& name) { c.model_kind = parse_model(name); })
      .def_property(
          "window", [](const BacktestConfig& c) { return c.train_cfg.window; },
          [](BacktestConfig& c, std::size_t v) { c.train_cfg.window = v; })
      .def_property(
          "hidden_size", [](const BacktestConfig& c) { return c.train_cfg.hidden_size; },
          [](BacktestConfig& c, std::size_t v) { c.train_cfg.hidden_size = v; })
      .def_property(
          "epochs", [](const BacktestConfig& c) { return c.train_cfg.epochs; },
          [](BacktestConfig& c, std::size_t v) { c.train_cfg.epochs = v; });

  py::class_<BacktestResult>(m, "BacktestResult")
      .def_property_readonly("equity", [](const BacktestResult& r) { return r.equity.equity; })
      .def_property_readonly("return_dates", [](const BacktestResult& r) { return iso_dates(r.return_dates); })
      .def_readonly("daily_returns", &BacktestResult::daily_returns)
      .def_readonly("weights", &BacktestResult::weights_history)
      .def_readonly("overall", &BacktestResult::overall)
      .def_property_readonly("regimes", [](const BacktestResult& r) { return regime_names(r.regimes); })
      .def_property_readonly("per_regime", [](const BacktestResult& r) {
        std::map<std::string, RiskReport> out;
        for (const auto& [regime, rep] : r.per_regime) out.emplace(std::string(to_string(regime)), rep);
        return out;
      });
  m.def("walk_forward", &walk_forward, py::arg("panel"), py::arg("config"));

  py::class_<HoldoutScore>(m, "HoldoutScore")
      .def_readonly("linear_mse", &HoldoutScore::linear_mse)
      .def_readonly("lstm_mse", &HoldoutScore::lstm_mse)
      .def_readonly("train_days", &HoldoutScore::train_days)
      .def_readonly("test_samples", &HoldoutScore::test_samples)
      .def_readonly("selected_factors", &HoldoutScore::selected_factors);
  m.def("holdout_comparison", &holdout_comparison, py::arg("panel"), py::arg("config"),
        py::arg("train_fraction") = 0.8);

  // Command-line entry points: returns (exit_code, stdout, stderr).
  m.def("run", &run_command, py::arg("command"), py::arg("config"), py::arg("out") = std::nullopt,
        py::arg("models") = std::nullopt);
}
