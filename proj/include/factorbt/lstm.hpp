#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "factorbt/marketdata.hpp"

namespace factorbt::lstm {

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCandidate = 3 };
inline constexpr std::size_t kGates = 4;

/// Single-layer LSTM with a linear scalar readout.
///
/// Gate blocks are stacked in the order input, forget, output, candidate:
/// rows [g*H, (g+1)*H) of `w`, `u` and `b` belong to gate g.
struct LstmParams {
  std::size_t hidden_size = 0;
  std::size_t input_size = 0;
  Eigen::MatrixXd w;      // 4H x n
  Eigen::MatrixXd u;      // 4H x H
  Eigen::VectorXd b;      // 4H
  Eigen::VectorXd w_out;  // H
  double b_out = 0.0;
  /// Identifies the parameter values a tape was recorded against. Copies
  /// share a stamp; call touch() after mutating the values in place.
  std::uint64_t version = 0;

  static LstmParams zeros(std::size_t hidden, std::size_t inputs);

  void touch();
  std::size_t parameter_count() const;
  bool all_finite() const;

  auto gate_w(std::size_t g) { return w.middleRows(static_cast<Eigen::Index>(g * hidden_size), static_cast<Eigen::Index>(hidden_size)); }
  auto gate_u(std::size_t g) { return u.middleRows(static_cast<Eigen::Index>(g * hidden_size), static_cast<Eigen::Index>(hidden_size)); }
  auto gate_b(std::size_t g) { return b.segment(static_cast<Eigen::Index>(g * hidden_size), static_cast<Eigen::Index>(hidden_size)); }

  /// Flat view in serialization order: per gate W (row-major), U (row-major),
  /// b; then w_out and b_out.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// Activations cached by forward() for an exact backward pass.
struct Tape {
  std::uint64_t version = 0;
  Eigen::MatrixXd inputs;  // T x n
  Eigen::MatrixXd gates;   // 4H x T, post-activation
  Eigen::MatrixXd cells;   // H x (T + 1), column 0 is the zero initial state
  Eigen::MatrixXd hidden;  // H x (T + 1)
  double prediction = 0.0;
};

struct ForwardResult {
  double prediction = 0.0;
  Tape tape;
};

/// Runs the recurrence from h = c = 0 over the rows of `sequence`.
/// Throws DimensionMismatch or NonFiniteInput.
ForwardResult forward(const LstmParams& params, const Eigen::MatrixXd& sequence);

/// Prediction only, without recording a tape.
double predict(const LstmParams& params, const Eigen::MatrixXd& sequence);

/// Final state after running the recurrence (for inspection).
LstmState final_state(const LstmParams& params, const Eigen::MatrixXd& sequence);

/// L = (1/T) * sum (actual - predicted)^2. Throws LengthMismatch / EmptyInput.
double mse_loss(std::span<const double> predictions, std::span<const double> actuals);

/// Per-sample objective (pred - target)^2 + l2 * (|W|^2 + |U|^2 + |w_out|^2).
double sample_objective(const LstmParams& params, const Eigen::MatrixXd& sequence, double target, double l2);

/// Exact gradient of sample_objective by backpropagation through time.
/// Throws StaleTape if `tape` was not recorded against these values.
LstmParams backward(const LstmParams& params, const Tape& tape, double target, double l2 = 0.0);

struct Sample {
  Eigen::MatrixXd inputs;  // window x n, oldest day first
  double target = 0.0;
  std::size_t asset = 0;
  std::size_t first_day = 0;
  std::size_t last_input_day = 0;
  std::size_t target_day = 0;
};

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) over all
/// parameters, numeric being the central difference with step `eps`.
double grad_check(const LstmParams& params, const Sample& sample, double eps, double l2 = 0.0);

/// Stride-1 windows of `window` days inside `range`, each targeting the
/// realised return of the following day. Ordered by asset, then start day.
/// Throws TooShort when range.size() <= window.
std::vector<Sample> make_windows(const FactorPanel& panel, const ReturnPanel& realised, std::size_t window,
                                 DayRange range);
std::vector<Sample> make_windows(const FactorPanel& panel, const ReturnPanel& realised, std::size_t window);

/// Inputs for the window of `window` days ending at `last_day` (inclusive).
Eigen::MatrixXd window_inputs(const FactorPanel& panel, std::size_t asset, std::size_t last_day,
                              std::size_t window);

struct TrainConfig {
  std::size_t window = 20;
  std::size_t hidden_size = 32;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double grad_clip = 5.0;  // infinity disables clipping
  double l2 = 1e-5;

  void validate() const;
};

/// Seeded uniform(-1/sqrt(H), 1/sqrt(H)) initialisation with forget bias 1.
LstmParams init_params(std::size_t hidden, std::size_t inputs, std::uint64_t seed);

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1, double beta2, double eps);

  /// One bias-corrected update of `params` with `grads` (same shape).
  void step(LstmParams& params, const LstmParams& grads);
  std::size_t steps() const { return t_; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Mean gradient of `batch` (in order), clipped to cfg.grad_clip in global
/// norm, applied with `opt`. Returns the batch's summed squared error.
double train_step(LstmParams& params, AdamOptimizer& opt, std::span<const Sample* const> batch,
                  const TrainConfig& cfg);

struct TrainResult {
  LstmParams params;
  std::vector<double> loss_curve;  // mean training MSE per epoch
};

/// Mini-batch training; single-threaded and bit-reproducible for a seed.
/// Throws DivergedLossError with the failing epoch.
TrainResult train(std::span<const Sample> samples, const TrainConfig& cfg);

std::vector<double> predict_all(const LstmParams& params, std::span<const Sample> samples);

inline constexpr std::uint32_t kParamsFormatVersion = 1;

/// "FBTL", u32 version, u32 H, u32 n, then little-endian f64 values in
/// flatten() order.
std::string serialize(const LstmParams& params);
LstmParams deserialize(std::string_view bytes);
void save_params(const LstmParams& params, const std::filesystem::path& path);
LstmParams load_params(const std::filesystem::path& path);

}  // namespace factorbt::lstm
