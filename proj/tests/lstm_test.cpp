#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "factorbt/error.hpp"
#include "factorbt/lstm.hpp"
#include "factorbt/rng.hpp"
#include "support.hpp"

namespace factorbt::lstm {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Sample random_sample(std::size_t window, std::size_t n, Rng& rng) {
  Sample s;
  s.inputs = Eigen::MatrixXd(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < s.inputs.rows(); ++r)
    for (Eigen::Index c = 0; c < s.inputs.cols(); ++c) s.inputs(r, c) = rng.normal();
  s.target = rng.normal();
  return s;
}

FactorPanel ramp_panel(std::size_t days, std::size_t assets) {
  FactorPanel p;
  p.factor_names = {"f"};
  for (std::size_t a = 0; a < assets; ++a) p.asset_ids.push_back("A" + std::to_string(a));
  for (std::size_t d = 0; d < days; ++d) p.calendar.push_back(Date{static_cast<std::int32_t>(d)});
  for (std::size_t d = 0; d < days; ++d)
    for (std::size_t a = 0; a < assets; ++a) p.values.push_back(static_cast<double>(d) + 0.01 * a);
  return p;
}

ReturnPanel ramp_returns(const FactorPanel& f) {
  ReturnPanel r;
  r.asset_ids = f.asset_ids;
  r.calendar = f.calendar;
  for (std::size_t d = 0; d < f.num_days(); ++d)
    for (std::size_t a = 0; a < f.num_assets(); ++a) r.values.push_back(1000.0 * d + a);
  return r;
}

TEST(Forward, ZeroNetworkPredictsZero) {
  const auto p = LstmParams::zeros(4, 3);
  Rng rng(1);
  const auto s = random_sample(6, 3, rng);
  EXPECT_EQ(forward(p, s.inputs).prediction, 0.0);
  EXPECT_EQ(predict(p, s.inputs), 0.0);
}

TEST(Forward, BiasPassthrough) {
  auto p = LstmParams::zeros(1, 1);
  p.b_out = 0.5;
  p.touch();
  Eigen::MatrixXd x(1, 1);
  x(0, 0) = 3.0;
  EXPECT_EQ(predict(p, x), 0.5);
}

TEST(Forward, ScalarGateOracle) {
  auto p = LstmParams::zeros(1, 1);
  const double wi = 0.3, wf = -0.2, wo = 0.7, wg = 1.1;
  const double ui = 0.5, uf = 0.4, uo = -0.6, ug = 0.2;
  const double bi = 0.1, bf = 1.0, bo = -0.3, bg = 0.05;
  p.w(kInputGate, 0) = wi;
  p.w(kForgetGate, 0) = wf;
  p.w(kOutputGate, 0) = wo;
  p.w(kCandidate, 0) = wg;
  p.u(kInputGate, 0) = ui;
  p.u(kForgetGate, 0) = uf;
  p.u(kOutputGate, 0) = uo;
  p.u(kCandidate, 0) = ug;
  p.b << bi, bf, bo, bg;
  p.w_out(0) = 1.7;
  p.b_out = -0.25;
  p.touch();

  Eigen::MatrixXd x(2, 1);
  x << 0.8, -1.3;
  double h = 0.0, c = 0.0;
  for (int t = 0; t < 2; ++t) {
    const double xt = x(t, 0);
    const double i = sigmoid(wi * xt + ui * h + bi);
    const double f = sigmoid(wf * xt + uf * h + bf);
    const double o = sigmoid(wo * xt + uo * h + bo);
    const double g = std::tanh(wg * xt + ug * h + bg);
    c = f * c + i * g;
    h = o * std::tanh(c);
  }
  const double oracle = 1.7 * h - 0.25;
  EXPECT_NEAR(predict(p, x), oracle, 1e-12);
  const auto state = final_state(p, x);
  EXPECT_NEAR(state.h(0), h, 1e-12);
  EXPECT_NEAR(state.c(0), c, 1e-12);
  // One step only.
  EXPECT_NEAR(predict(p, x.topRows(1)),
              1.7 * sigmoid(wo * 0.8 + bo) * std::tanh(sigmoid(wi * 0.8 + bi) * std::tanh(wg * 0.8 + bg)) - 0.25,
              1e-12);
}

TEST(Forward, Errors) {
  const auto p = LstmParams::zeros(2, 3);
  Eigen::MatrixXd bad(4, 2);
  bad.setZero();
  try {
    forward(p, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  Eigen::MatrixXd nan(4, 3);
  nan.setZero();
  nan(2, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    forward(p, nan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteInput);
  }
}

TEST(MseLoss, Basics) {
  const std::vector<double> a = {0.5, -1.0, 2.0};
  EXPECT_EQ(mse_loss(a, a), 0.0);
  EXPECT_EQ(mse_loss(std::vector<double>{0, 0}, std::vector<double>{1, 1}), 1.0);
  EXPECT_THROW(mse_loss(std::vector<double>{}, std::vector<double>{}), Error);
  EXPECT_THROW(mse_loss(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST(MseLoss, TwoPassOracle) {
  Rng rng(17);
  std::vector<double> p(100), y(100);
  for (std::size_t i = 0; i < 100; ++i) {
    p[i] = rng.normal();
    y[i] = rng.normal();
  }
  // Reverse-order accumulation in long double.
  long double acc = 0.0L;
  for (std::size_t i = 100; i-- > 0;) {
    const long double d = static_cast<long double>(y[i]) - p[i];
    acc += d * d;
  }
  const double oracle = static_cast<double>(acc / 100.0L);
  EXPECT_NEAR(mse_loss(p, y), oracle, 1e-12 * oracle);
}

TEST(Backward, ZeroNetworkZeroTarget) {
  const auto p = LstmParams::zeros(3, 2);
  Rng rng(2);
  const auto s = random_sample(4, 2, rng);
  const auto g = backward(p, forward(p, s.inputs).tape, 0.0);
  for (double v : g.flatten()) EXPECT_EQ(v, 0.0);
  Sample z = s;
  z.target = 0.0;
  EXPECT_EQ(grad_check(p, z, 1e-5), 0.0);
}

TEST(Backward, StaleTape) {
  auto p = init_params(3, 2, 5);
  Rng rng(3);
  const auto s = random_sample(4, 2, rng);
  const auto tape = forward(p, s.inputs).tape;
  p.w(0, 0) += 0.1;
  p.touch();
  try {
    backward(p, tape, s.target);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaleTape);
  }
}

TEST(Backward, ReadoutBiasGradientLinearInResidual) {
  const auto p = init_params(4, 3, 9);
  Rng rng(4);
  const auto s = random_sample(5, 3, rng);
  const auto fr = forward(p, s.inputs);
  const double r = 0.37;
  const auto g1 = backward(p, fr.tape, fr.prediction - r);
  const auto g2 = backward(p, fr.tape, fr.prediction - 2.0 * r);
  EXPECT_NEAR(g2.b_out, 2.0 * g1.b_out, 1e-10);
  EXPECT_NEAR(g1.b_out, 2.0 * r, 1e-12);
}

TEST(GradCheck, RandomInstances) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = init_params(4, 3, seed);
    Rng rng(seed + 100);
    const auto s = random_sample(5, 3, rng);
    EXPECT_LT(grad_check(p, s, 1e-5), 1e-5) << "seed " << seed;
    EXPECT_LT(grad_check(p, s, 1e-5, 1e-3), 1e-5) << "seed " << seed << " with l2";
  }
}

TEST(GradCheck, LargeStepIsWorse) {
  const auto p = init_params(4, 3, 2);
  Rng rng(102);
  const auto s = random_sample(5, 3, rng);
  EXPECT_GT(grad_check(p, s, 1e-2), grad_check(p, s, 1e-5));
}

TEST(MakeWindows, Counts) {
  const auto f21 = ramp_panel(21, 1);
  EXPECT_EQ(make_windows(f21, ramp_returns(f21), 20).size(), 1u);
  const auto f25 = ramp_panel(25, 1);
  const auto w = make_windows(f25, ramp_returns(f25), 20);
  ASSERT_EQ(w.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(w[i].target_day, 20 + i);
    EXPECT_EQ(w[i].target, 1000.0 * (20 + i));
    EXPECT_EQ(w[i].inputs(19, 0), static_cast<double>(19 + i));
  }
  const auto f20 = ramp_panel(20, 1);
  try {
    make_windows(f20, ramp_returns(f20), 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooShort);
  }
}

TEST(MakeWindows, NoLookAhead) {
  const auto f = ramp_panel(60, 3);
  const auto samples = make_windows(f, ramp_returns(f), 7, DayRange{5, 50});
  EXPECT_EQ(samples.size(), 3u * (45 - 7));
  for (const auto& s : samples) {
    // Inputs encode their day index, targets encode theirs.
    const double max_input_day = s.inputs.col(0).maxCoeff();
    EXPECT_LT(std::floor(max_input_day), static_cast<double>(s.target_day));
    EXPECT_EQ(s.last_input_day + 1, s.target_day);
    EXPECT_GE(s.first_day, 5u);
    EXPECT_LT(s.target_day, 50u);
    EXPECT_EQ(s.target, 1000.0 * s.target_day + s.asset);
  }
}

TEST(Train, LearnsZeroTargets) {
  Rng rng(8);
  std::vector<Sample> samples;
  for (int i = 0; i < 64; ++i) {
    auto s = random_sample(5, 2, rng);
    s.target = 0.0;
    samples.push_back(s);
  }
  TrainConfig cfg;
  cfg.window = 5;
  cfg.hidden_size = 4;
  cfg.epochs = 30;
  cfg.learning_rate = 1e-2;
  cfg.seed = 3;
  const auto res = train(samples, cfg);
  ASSERT_EQ(res.loss_curve.size(), 30u);
  EXPECT_LT(res.loss_curve.back(), res.loss_curve.front());
}

TEST(Train, Deterministic) {
  Rng rng(9);
  std::vector<Sample> samples;
  for (int i = 0; i < 50; ++i) samples.push_back(random_sample(4, 3, rng));
  TrainConfig cfg;
  cfg.window = 4;
  cfg.hidden_size = 5;
  cfg.epochs = 4;
  cfg.batch_size = 8;
  cfg.seed = 77;
  const auto a = train(samples, cfg);
  const auto b = train(samples, cfg);
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_EQ(a.params.flatten(), b.params.flatten());
  cfg.seed = 78;
  EXPECT_NE(train(samples, cfg).loss_curve, a.loss_curve);
}

TEST(Train, InitialisationRange) {
  const auto p = init_params(16, 3, 4);
  const double k = 0.25;
  for (Eigen::Index i = 0; i < p.w.size(); ++i) EXPECT_LE(std::abs(p.w.data()[i]), k);
  for (std::size_t h = 0; h < 16; ++h) EXPECT_EQ(p.b(static_cast<Eigen::Index>(16 + h)), 1.0);
}

TEST(Train, Diverges) {
  Rng rng(10);
  std::vector<Sample> samples;
  for (int i = 0; i < 8; ++i) {
    auto s = random_sample(3, 2, rng);
    s.target = 1e200;
    samples.push_back(s);
  }
  TrainConfig cfg;
  cfg.window = 3;
  cfg.hidden_size = 2;
  cfg.epochs = 3;
  try {
    train(samples, cfg);
    FAIL();
  } catch (const DivergedLossError& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivergedLoss);
  }
}

TEST(Train, GradientClippingBoundsFirstStep) {
  Rng rng(11);
  std::vector<Sample> samples;
  for (int i = 0; i < 4; ++i) {
    auto s = random_sample(3, 2, rng);
    s.target = 1e3;
    samples.push_back(s);
  }
  TrainConfig cfg;
  cfg.window = 3;
  cfg.hidden_size = 2;
  cfg.learning_rate = 0.1;
  cfg.grad_clip = 1.0;
  auto p = init_params(2, 2, 1);
  const auto before = p.flatten();
  AdamOptimizer opt(p.parameter_count(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);
  std::vector<const Sample*> batch;
  for (const auto& s : samples) batch.push_back(&s);
  train_step(p, opt, batch, cfg);
  const auto after = p.flatten();
  // Adam's first bias-corrected step moves each parameter by at most lr.
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_LE(std::abs(after[i] - before[i]), 0.1 + 1e-12);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(Serialization, RoundTrip) {
  const auto p = init_params(5, 3, 12);
  const auto bytes = serialize(p);
  EXPECT_EQ(bytes.substr(0, 4), "FBTL");
  EXPECT_EQ(bytes.size(), 16 + 8 * p.parameter_count());
  const auto q = deserialize(bytes);
  EXPECT_EQ(q.hidden_size, 5u);
  EXPECT_EQ(q.input_size, 3u);
  EXPECT_EQ(q.flatten(), p.flatten());

  const auto dir = factorbt::testing::scratch_dir("fbtl");
  save_params(p, dir / "m.fbtl");
  EXPECT_EQ(load_params(dir / "m.fbtl").flatten(), p.flatten());
  EXPECT_EQ(factorbt::testing::slurp(dir / "m.fbtl"), bytes);

  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize(bad), Error);
  EXPECT_THROW(deserialize(bytes.substr(0, bytes.size() - 3)), Error);
  try {
    load_params(dir / "none.fbtl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.window = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace factorbt::lstm
