#include "factorbt/lstm.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "factorbt/csv.hpp"
#include "factorbt/error.hpp"
#include "factorbt/rng.hpp"

namespace factorbt::lstm {

namespace {

std::atomic<std::uint64_t> g_version{0};

// Calls f(value&) for every parameter in flatten() order.
template <typename Params, typename F>
void visit(Params& p, F&& f) {
  const auto H = static_cast<Eigen::Index>(p.hidden_size);
  const auto n = static_cast<Eigen::Index>(p.input_size);
  for (Eigen::Index g = 0; g < static_cast<Eigen::Index>(kGates); ++g) {
    for (Eigen::Index r = g * H; r < (g + 1) * H; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        f(p.w(r, c));
      }
    }
    for (Eigen::Index r = g * H; r < (g + 1) * H; ++r) {
      for (Eigen::Index c = 0; c < H; ++c) {
        f(p.u(r, c));
      }
    }
    for (Eigen::Index r = g * H; r < (g + 1) * H; ++r) {
      f(p.b(r));
    }
  }
  for (Eigen::Index r = 0; r < H; ++r) {
    f(p.w_out(r));
  }
  f(p.b_out);
}

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) { return 1.0 / (1.0 + (-x).exp()); }

void check_sequence(const LstmParams& params, const Eigen::MatrixXd& sequence) {
  if (sequence.rows() == 0 || static_cast<std::size_t>(sequence.cols()) != params.input_size) {
    throw Error(ErrorCode::DimensionMismatch, "sequence is " + std::to_string(sequence.rows()) + "x" +
                                                  std::to_string(sequence.cols()) + ", network expects n=" +
                                                  std::to_string(params.input_size));
  }
  if (!sequence.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, "sequence contains NaN or Inf");
  }
}

double penalty(const LstmParams& p) {
  return p.w.squaredNorm() + p.u.squaredNorm() + p.w_out.squaredNorm();
}

void accumulate(LstmParams& acc, const LstmParams& g) {
  acc.w += g.w;
  acc.u += g.u;
  acc.b += g.b;
  acc.w_out += g.w_out;
  acc.b_out += g.b_out;
}

void scale(LstmParams& p, double s) {
  p.w *= s;
  p.u *= s;
  p.b *= s;
  p.w_out *= s;
  p.b_out *= s;
}

template <typename Step>
void run(const LstmParams& params, const Eigen::MatrixXd& sequence, Step&& on_step) {
  const auto H = static_cast<Eigen::Index>(params.hidden_size);
  Eigen::MatrixXd pre = params.w * sequence.transpose();
  pre.colwise() += params.b;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd z(4 * H);
  for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
    z.noalias() = pre.col(t);
    z.noalias() += params.u * h;
    const Eigen::ArrayXd i = sigmoid(z.segment(0, H).array());
    const Eigen::ArrayXd f = sigmoid(z.segment(H, H).array());
    const Eigen::ArrayXd o = sigmoid(z.segment(2 * H, H).array());
    const Eigen::ArrayXd g = z.segment(3 * H, H).array().tanh();
    c = (f * c.array() + i * g).matrix();
    h = (o * c.array().tanh()).matrix();
    on_step(t, i, f, o, g, c, h);
  }
}

}  // namespace

LstmParams LstmParams::zeros(std::size_t hidden, std::size_t inputs) {
  if (hidden == 0 || inputs == 0) {
    throw Error(ErrorCode::DimensionMismatch, "hidden and input sizes must be positive");
  }
  LstmParams p;
  p.hidden_size = hidden;
  p.input_size = inputs;
  const auto H = static_cast<Eigen::Index>(hidden);
  const auto n = static_cast<Eigen::Index>(inputs);
  p.w = Eigen::MatrixXd::Zero(4 * H, n);
  p.u = Eigen::MatrixXd::Zero(4 * H, H);
  p.b = Eigen::VectorXd::Zero(4 * H);
  p.w_out = Eigen::VectorXd::Zero(H);
  p.b_out = 0.0;
  p.touch();
  return p;
}

void LstmParams::touch() { version = ++g_version; }

std::size_t LstmParams::parameter_count() const {
  return kGates * hidden_size * (input_size + hidden_size + 1) + hidden_size + 1;
}

bool LstmParams::all_finite() const {
  return w.allFinite() && u.allFinite() && b.allFinite() && w_out.allFinite() && std::isfinite(b_out);
}

std::vector<double> LstmParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  visit(*this, [&](const double& v) { out.push_back(v); });
  return out;
}

void LstmParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(parameter_count()) + " values");
  }
  std::size_t i = 0;
  visit(*this, [&](double& v) { v = flat[i++]; });
  touch();
}

ForwardResult forward(const LstmParams& params, const Eigen::MatrixXd& sequence) {
  check_sequence(params, sequence);
  const auto H = static_cast<Eigen::Index>(params.hidden_size);
  const auto T = sequence.rows();
  ForwardResult out;
  Tape& tape = out.tape;
  tape.version = params.version;
  tape.inputs = sequence;
  tape.gates.resize(4 * H, T);
  tape.cells = Eigen::MatrixXd::Zero(H, T + 1);
  tape.hidden = Eigen::MatrixXd::Zero(H, T + 1);
  run(params, sequence,
      [&](Eigen::Index t, const Eigen::ArrayXd& i, const Eigen::ArrayXd& f, const Eigen::ArrayXd& o,
          const Eigen::ArrayXd& g, const Eigen::VectorXd& c, const Eigen::VectorXd& h) {
        tape.gates.col(t).segment(0, H) = i.matrix();
        tape.gates.col(t).segment(H, H) = f.matrix();
        tape.gates.col(t).segment(2 * H, H) = o.matrix();
        tape.gates.col(t).segment(3 * H, H) = g.matrix();
        tape.cells.col(t + 1) = c;
        tape.hidden.col(t + 1) = h;
      });
  tape.prediction = params.w_out.dot(tape.hidden.col(T)) + params.b_out;
  out.prediction = tape.prediction;
  return out;
}

double predict(const LstmParams& params, const Eigen::MatrixXd& sequence) {
  return params.w_out.dot(final_state(params, sequence).h) + params.b_out;
}

LstmState final_state(const LstmParams& params, const Eigen::MatrixXd& sequence) {
  check_sequence(params, sequence);
  LstmState state;
  run(params, sequence,
      [&](Eigen::Index t, const Eigen::ArrayXd&, const Eigen::ArrayXd&, const Eigen::ArrayXd&,
          const Eigen::ArrayXd&, const Eigen::VectorXd& c, const Eigen::VectorXd& h) {
        if (t + 1 == sequence.rows()) {
          state.c = c;
          state.h = h;
        }
      });
  return state;
}

double mse_loss(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.size() != actuals.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(predictions.size()) + " predictions vs " + std::to_string(actuals.size()) + " actuals");
  }
  if (predictions.empty()) {
    throw Error(ErrorCode::EmptyInput, "mse_loss of no samples");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < predictions.size(); ++t) {
    const double e = actuals[t] - predictions[t];
    sum += e * e;
  }
  return sum / static_cast<double>(predictions.size());
}

double sample_objective(const LstmParams& params, const Eigen::MatrixXd& sequence, double target, double l2) {
  const double e = predict(params, sequence) - target;
  return e * e + l2 * penalty(params);
}

LstmParams backward(const LstmParams& params, const Tape& tape, double target, double l2) {
  if (tape.version != params.version) {
    throw Error(ErrorCode::StaleTape, "tape was recorded against different parameters");
  }
  const auto H = static_cast<Eigen::Index>(params.hidden_size);
  const auto T = tape.inputs.rows();
  if (tape.inputs.cols() != static_cast<Eigen::Index>(params.input_size) || tape.gates.rows() != 4 * H) {
    throw Error(ErrorCode::DimensionMismatch, "tape shape does not match parameters");
  }

  LstmParams grads = LstmParams::zeros(params.hidden_size, params.input_size);
  const double dy = 2.0 * (tape.prediction - target);
  grads.w_out = dy * tape.hidden.col(T);
  grads.b_out = dy;

  Eigen::MatrixXd dz(4 * H, T);
  Eigen::VectorXd dh = dy * params.w_out;
  Eigen::ArrayXd dc_next = Eigen::ArrayXd::Zero(H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const Eigen::ArrayXd i = tape.gates.col(t).segment(0, H).array();
    const Eigen::ArrayXd f = tape.gates.col(t).segment(H, H).array();
    const Eigen::ArrayXd o = tape.gates.col(t).segment(2 * H, H).array();
    const Eigen::ArrayXd g = tape.gates.col(t).segment(3 * H, H).array();
    const Eigen::ArrayXd c_prev = tape.cells.col(t).array();
    const Eigen::ArrayXd tc = tape.cells.col(t + 1).array().tanh();

    const Eigen::ArrayXd dh_a = dh.array();
    const Eigen::ArrayXd dc = dc_next + dh_a * o * (1.0 - tc * tc);
    dz.col(t).segment(0, H) = (dc * g * i * (1.0 - i)).matrix();
    dz.col(t).segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
    dz.col(t).segment(2 * H, H) = (dh_a * tc * o * (1.0 - o)).matrix();
    dz.col(t).segment(3 * H, H) = (dc * i * (1.0 - g * g)).matrix();
    dc_next = dc * f;
    dh.noalias() = params.u.transpose() * dz.col(t);
  }
  grads.w.noalias() = dz * tape.inputs;
  grads.u.noalias() = dz * tape.hidden.leftCols(T).transpose();
  grads.b = dz.rowwise().sum();

  if (l2 != 0.0) {
    grads.w += 2.0 * l2 * params.w;
    grads.u += 2.0 * l2 * params.u;
    grads.w_out += 2.0 * l2 * params.w_out;
  }
  return grads;
}

double grad_check(const LstmParams& params, const Sample& sample, double eps, double l2) {
  const auto fwd = forward(params, sample.inputs);
  const auto analytic = backward(params, fwd.tape, sample.target, l2).flatten();
  auto theta = params.flatten();
  LstmParams probe = params;
  double worst = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + eps;
    probe.assign(theta);
    const double up = sample_objective(probe, sample.inputs, sample.target, l2);
    theta[k] = saved - eps;
    probe.assign(theta);
    const double down = sample_objective(probe, sample.inputs, sample.target, l2);
    theta[k] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic[k];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

Eigen::MatrixXd window_inputs(const FactorPanel& panel, std::size_t asset, std::size_t last_day,
                              std::size_t window) {
  if (window == 0 || last_day + 1 < window || last_day >= panel.num_days()) {
    throw Error(ErrorCode::TooShort, "window does not fit before day " + std::to_string(last_day));
  }
  const std::size_t n = panel.num_factors();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(n));
  const std::size_t first = last_day + 1 - window;
  for (std::size_t r = 0; r < window; ++r) {
    const auto row = panel.row(first + r, asset);
    for (std::size_t k = 0; k < n; ++k) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  return x;
}

std::vector<Sample> make_windows(const FactorPanel& panel, const ReturnPanel& realised, std::size_t window,
                                 DayRange range) {
  if (realised.num_days() != panel.num_days() || realised.num_assets() != panel.num_assets()) {
    throw Error(ErrorCode::LengthMismatch, "factor and return panels differ in shape");
  }
  if (window == 0 || range.end > panel.num_days() || range.size() <= window) {
    throw Error(ErrorCode::TooShort, "range of " + std::to_string(range.size()) + " days cannot hold a window of " +
                                         std::to_string(window) + " plus a target");
  }
  std::vector<Sample> out;
  out.reserve(panel.num_assets() * (range.size() - window));
  for (std::size_t a = 0; a < panel.num_assets(); ++a) {
    for (std::size_t start = range.begin; start + window < range.end; ++start) {
      Sample s;
      s.asset = a;
      s.first_day = start;
      s.last_input_day = start + window - 1;
      s.target_day = start + window;
      s.inputs = window_inputs(panel, a, s.last_input_day, window);
      s.target = realised.at(s.target_day, a);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<Sample> make_windows(const FactorPanel& panel, const ReturnPanel& realised, std::size_t window) {
  return make_windows(panel, realised, window, DayRange{0, panel.num_days()});
}

void TrainConfig::validate() const {
  if (window < 1 || epochs < 1 || hidden_size < 1 || batch_size < 1) {
    throw Error(ErrorCode::InvalidConfig, "window, epochs, hidden_size and batch_size must be at least 1");
  }
  if (!(learning_rate > 0.0) || !(grad_clip > 0.0) || !(l2 >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "learning_rate and grad_clip must be positive, l2 non-negative");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "invalid optimizer constants");
  }
}

LstmParams init_params(std::size_t hidden, std::size_t inputs, std::uint64_t seed) {
  LstmParams p = LstmParams::zeros(hidden, inputs);
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  visit(p, [&](double& v) { v = rng.uniform(-k, k); });
  p.gate_b(kForgetGate).setConstant(1.0);
  p.touch();
  return p;
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, double learning_rate, double beta1, double beta2,
                             double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void AdamOptimizer::step(LstmParams& params, const LstmParams& grads) {
  const auto g = grads.flatten();
  if (g.size() != m_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "gradient size does not match optimizer state");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t k = 0;
  visit(params, [&](double& theta) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g[k] * g[k];
    const double m_hat = m_[k] / c1;
    const double v_hat = v_[k] / c2;
    theta -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    ++k;
  });
  params.touch();
}

double train_step(LstmParams& params, AdamOptimizer& opt, std::span<const Sample* const> batch,
                  const TrainConfig& cfg) {
  LstmParams grads = LstmParams::zeros(params.hidden_size, params.input_size);
  double sse = 0.0;
  for (const Sample* s : batch) {
    const auto fwd = forward(params, s->inputs);
    const double e = fwd.prediction - s->target;
    sse += e * e;
    accumulate(grads, backward(params, fwd.tape, s->target, cfg.l2));
  }
  scale(grads, 1.0 / static_cast<double>(batch.size()));
  if (std::isfinite(cfg.grad_clip)) {
    const auto flat = grads.flatten();
    const double norm = std::sqrt(std::inner_product(flat.begin(), flat.end(), flat.begin(), 0.0));
    if (norm > cfg.grad_clip) {
      scale(grads, cfg.grad_clip / norm);
    }
  }
  opt.step(params, grads);
  return sse;
}

TrainResult train(std::span<const Sample> samples, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyInput, "no training samples");
  }
  const auto n = static_cast<std::size_t>(samples.front().inputs.cols());
  for (const auto& s : samples) {
    if (static_cast<std::size_t>(s.inputs.cols()) != n || s.inputs.rows() == 0) {
      throw Error(ErrorCode::DimensionMismatch, "samples have inconsistent shapes");
    }
  }

  TrainResult result;
  result.params = init_params(cfg.hidden_size, n, cfg.seed);
  AdamOptimizer opt(result.params.parameter_count(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps);
  // Shuffle stream is separate from the initialisation stream.
  Rng shuffler(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<const Sample*> order(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    order[i] = &samples[i];
  }
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffler.shuffle(std::span<const Sample*>(order));
    double sse = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - begin);
      sse += train_step(result.params, opt, std::span<const Sample* const>(order.data() + begin, len), cfg);
    }
    const double loss = sse / static_cast<double>(samples.size());
    if (!std::isfinite(loss) || !result.params.all_finite()) {
      throw DivergedLossError(epoch, "training loss is not finite at epoch " + std::to_string(epoch));
    }
    result.loss_curve.push_back(loss);
  }
  return result;
}

std::vector<double> predict_all(const LstmParams& params, std::span<const Sample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(predict(params, s.inputs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary format

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
  }
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

}  // namespace

std::string serialize(const LstmParams& params) {
  std::string out = "FBTL";
  put_u32(out, kParamsFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(params.hidden_size));
  put_u32(out, static_cast<std::uint32_t>(params.input_size));
  visit(params, [&](const double& v) { put_f64(out, v); });
  return out;
}

LstmParams deserialize(std::string_view bytes) {
  constexpr std::size_t kHeader = 16;
  if (bytes.size() < kHeader || bytes.substr(0, 4) != "FBTL") {
    throw Error(ErrorCode::ParseError, "not an FBTL parameter file");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kParamsFormatVersion) {
    throw Error(ErrorCode::ParseError, "unsupported FBTL version " + std::to_string(version));
  }
  const auto hidden = static_cast<std::size_t>(get_le(bytes, 8, 4));
  const auto inputs = static_cast<std::size_t>(get_le(bytes, 12, 4));
  if (hidden == 0 || inputs == 0 || hidden > 65536 || inputs > 65536) {
    throw Error(ErrorCode::ParseError, "invalid dimensions in FBTL header");
  }
  LstmParams p = LstmParams::zeros(hidden, inputs);
  if (bytes.size() != kHeader + 8 * p.parameter_count()) {
    throw Error(ErrorCode::ParseError, "FBTL payload size does not match H=" + std::to_string(hidden) +
                                           ", n=" + std::to_string(inputs));
  }
  std::size_t offset = kHeader;
  visit(p, [&](double& v) {
    v = std::bit_cast<double>(get_le(bytes, offset, 8));
    offset += 8;
  });
  if (!p.all_finite()) {
    throw Error(ErrorCode::ParseError, "FBTL file contains non-finite parameters");
  }
  p.touch();
  return p;
}

void save_params(const LstmParams& params, const std::filesystem::path& path) {
  csv::write_file(path, serialize(params));
}

LstmParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace factorbt::lstm
