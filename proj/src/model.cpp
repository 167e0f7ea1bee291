#include "reverbkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reverbkit {

namespace {

Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng, double gain = 1.0) {
  Matrix m(rows, cols);
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : m.data) v = rng.uniform(-limit, limit);
  return m;
}

void require_mel_width(const ReverbModel& model, const Matrix& mel, const char* who) {
  if (mel.cols != model.cfg.n_mels) {
    throw std::invalid_argument(std::string(who) + ": mel band count does not match the model");
  }
  if (mel.rows == 0) {
    throw std::invalid_argument(std::string(who) + ": empty spectrogram");
  }
}

ad::TensorPtr normalize_mel(const ReverbModel& model, const Matrix& mel) {
  const double s = model.cfg.mel_scale;
  return ad::affine_const(ad::constant(mel), 1.0 / s, model.cfg.mel_offset / s);
}

}  // namespace

const ad::TensorPtr& ReverbModel::find(const std::string& name) const {
  for (const auto& [n, t] : params) {
    if (n == name) return t;
  }
  throw std::invalid_argument("ReverbModel: no parameter named '" + name + "'");
}

std::vector<ad::TensorPtr> ReverbModel::trainable() const {
  std::vector<ad::TensorPtr> out;
  out.reserve(params.size());
  for (const auto& [n, t] : params) out.push_back(t);
  return out;
}

std::size_t ReverbModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t->size();
  return n;
}

ReverbModel make_model(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.n_mels == 0 || cfg.hidden == 0 || cfg.feature_dim == 0 ||
      cfg.conv_kernel % 2 == 0 || !(cfg.mel_scale > 0.0)) {
    throw std::invalid_argument("make_model: invalid config");
  }
  ReverbModel model;
  model.cfg = cfg;
  const std::size_t M = cfg.n_mels, H = cfg.hidden, D = cfg.feature_dim, K = cfg.conv_kernel;

  auto add_param = [&](const std::string& name, const Matrix& init) {
    model.params.emplace_back(name, ad::param(init));
  };
  auto rng_for = [&](std::size_t i) { return Rng(derive_seed(seed, i)); };

  std::size_t i = 0;
  Rng r0 = rng_for(i++);
  add_param("enc.w1", xavier_init(M, H, r0));
  add_param("enc.b1", Matrix(1, H));
  Rng r1 = rng_for(i++);
  add_param("enc.w2", xavier_init(H, H, r1));
  add_param("enc.b2", Matrix(1, H));
  // Depthwise kernel starts as an identity-in-time tap plus small noise so the
  // early encoder behaves like the per-frame stack it wraps.
  Rng r2 = rng_for(i++);
  Matrix kernel(K, H);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t c = 0; c < H; ++c) {
      kernel.at(k, c) = (k == K / 2 ? 1.0 : 0.0) + r2.uniform(-0.1, 0.1);
    }
  }
  add_param("enc.conv", kernel);
  Rng r3 = rng_for(i++);
  add_param("enc.w3", xavier_init(H, H, r3));
  add_param("enc.b3", Matrix(1, H));
  Rng r4 = rng_for(i++);
  add_param("enc.w4", xavier_init(H, H, r4));
  add_param("enc.b4", Matrix(1, H));
  Rng r5 = rng_for(i++);
  add_param("enc.head_w", xavier_init(H, D, r5));
  add_param("enc.head_b", Matrix(1, D));

  Rng r6 = rng_for(i++);
  add_param("dec.w1", xavier_init(M + D, H, r6));
  add_param("dec.b1", Matrix(1, H));
  Rng r7 = rng_for(i++);
  add_param("dec.w2", xavier_init(H, H, r7));
  add_param("dec.b2", Matrix(1, H));
  Rng r8 = rng_for(i++);
  add_param("dec.w3", xavier_init(H, M, r8, 0.5));
  add_param("dec.b3", Matrix(1, M));
  return model;
}

ad::TensorPtr encode_graph(const ReverbModel& model, const Matrix& x_mel,
                           const std::vector<std::uint8_t>* frame_mask) {
  require_mel_width(model, x_mel, "encode");
  if (x_mel.rows == 0) {
    throw std::invalid_argument("encode: input has no frames");
  }
  ad::TensorPtr h = normalize_mel(model, x_mel);
  h = ad::tanh_of(ad::add_row_bias(ad::matmul(h, model.find("enc.w1")), model.find("enc.b1")));
  h = ad::tanh_of(ad::add_row_bias(ad::matmul(h, model.find("enc.w2")), model.find("enc.b2")));
  h = ad::depthwise_conv_rows(h, model.find("enc.conv"));
  h = ad::tanh_of(ad::add_row_bias(ad::matmul(h, model.find("enc.w3")), model.find("enc.b3")));
  h = ad::tanh_of(ad::add_row_bias(ad::matmul(h, model.find("enc.w4")), model.find("enc.b4")));
  h = ad::mean_rows(h, frame_mask);
  return ad::add_row_bias(ad::matmul(h, model.find("enc.head_w")), model.find("enc.head_b"));
}

ad::TensorPtr decode_graph(const ReverbModel& model, const Matrix& clean_mel,
                           const ad::TensorPtr& c) {
  require_mel_width(model, clean_mel, "decode");
  ad::TensorPtr feature = c;
  if (!feature) {
    feature = ad::constant(Matrix(1, model.cfg.feature_dim));
  }
  if (feature->rows != 1 || feature->cols != model.cfg.feature_dim) {
    throw std::invalid_argument("decode: feature dimension does not match the model");
  }
  ad::TensorPtr h = ad::concat_cols(normalize_mel(model, clean_mel),
                                    ad::broadcast_rows(feature, clean_mel.rows));
  h = ad::tanh_of(ad::add_row_bias(ad::matmul(h, model.find("dec.w1")), model.find("dec.b1")));
  h = ad::tanh_of(ad::add_row_bias(ad::matmul(h, model.find("dec.w2")), model.find("dec.b2")));
  h = ad::add_row_bias(ad::matmul(h, model.find("dec.w3")), model.find("dec.b3"));
  return ad::affine_const(h, model.cfg.mel_scale, -model.cfg.mel_offset);
}

std::vector<double> encode(const ReverbModel& model, const LogMelSpectrogram& x_mel) {
  return encode_graph(model, x_mel.frames)->value;
}

Matrix decode(const ReverbModel& model, const Matrix& clean_mel, const std::vector<double>& c) {
  ad::TensorPtr feature;
  if (!c.empty()) {
    if (c.size() != model.cfg.feature_dim) {
      throw std::invalid_argument("decode: feature dimension does not match the model");
    }
    feature = ad::constant_row(c);
  }
  return decode_graph(model, clean_mel, feature)->to_matrix();
}

double spectral_recon_loss(const Matrix& target, const Matrix& pred) {
  if (target.rows != pred.rows || target.cols != pred.cols) {
    throw std::invalid_argument("spectral_recon_loss: shape mismatch");
  }
  double l1 = 0.0, l2 = 0.0, t2 = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target.data[i] - pred.data[i];
    l1 += std::abs(d);
    l2 += d * d;
    t2 += target.data[i] * target.data[i];
  }
  if (t2 <= 0.0) {
    throw std::invalid_argument("spectral_recon_loss: all-zero target");
  }
  return l1 + l2 + l2 / t2;
}

ad::TensorPtr spectral_recon_loss_graph(const Matrix& target, const ad::TensorPtr& pred) {
  if (target.rows != pred->rows || target.cols != pred->cols) {
    throw std::invalid_argument("spectral_recon_loss: shape mismatch");
  }
  double t2 = 0.0;
  for (double v : target.data) t2 += v * v;
  if (t2 <= 0.0) {
    throw std::invalid_argument("spectral_recon_loss: all-zero target");
  }
  const ad::TensorPtr diff = ad::sub(ad::constant(target), pred);
  const ad::TensorPtr l2 = ad::sum_sq(diff);
  // l1 + l2 + l2/t2 with a constant target folds into l1 + (1 + 1/t2) * l2.
  return ad::add(ad::sum_abs(diff), ad::scale(l2, 1.0 + 1.0 / t2));
}

SwitchingLoss switching_loss(const ReverbModel& model, const Matrix& s_mel,
                             const Matrix& r_mel, const Matrix& x_mel, double q, Rng& rng) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("switching_loss: q must be in [0, 1]");
  }
  SwitchingLoss out;
  out.reverb_branch = rng.uniform01() > q;
  if (out.reverb_branch) {
    const ad::TensorPtr c = encode_graph(model, x_mel);
    out.loss = spectral_recon_loss_graph(r_mel, decode_graph(model, s_mel, c));
  } else {
    out.loss = spectral_recon_loss_graph(s_mel, decode_graph(model, s_mel, nullptr));
  }
  return out;
}

void AdamState::init(const std::vector<ad::TensorPtr>& params) {
  step = 0;
  m.assign(params.size(), {});
  v.assign(params.size(), {});
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i].assign(params[i]->size(), 0.0);
    v[i].assign(params[i]->size(), 0.0);
  }
}

void adam_step(const std::vector<ad::TensorPtr>& params, AdamState& state) {
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state was initialized for a different parameter set");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double warmup = static_cast<double>(std::max<std::size_t>(state.cfg.warmup_steps, 1));
  const double lr = state.cfg.lr * std::min(1.0, t / warmup);
  const double bc1 = 1.0 - std::pow(state.cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(state.cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Tensor& p = *params[i];
    p.ensure_grad();
    if (state.m[i].size() != p.size()) {
      throw std::invalid_argument("adam_step: parameter shape changed");
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double g = p.grad[j];
      state.m[i][j] = state.cfg.beta1 * state.m[i][j] + (1.0 - state.cfg.beta1) * g;
      state.v[i][j] = state.cfg.beta2 * state.v[i][j] + (1.0 - state.cfg.beta2) * g * g;
      const double mhat = state.m[i][j] / bc1;
      const double vhat = state.v[i][j] / bc2;
      p.value[j] -= lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
    }
  }
}

TrainStats train(ReverbModel& model, const std::vector<TrainItem>& items,
                 const TrainConfig& cfg) {
  if (items.empty()) throw std::invalid_argument("train: empty item list");
  if (cfg.batch == 0) throw std::invalid_argument("train: batch must be >= 1");

  const std::vector<ad::TensorPtr> params = model.trainable();
  AdamState adam;
  adam.cfg = cfg.adam;
  adam.init(params);

  Rng rng(cfg.seed);
  TrainStats stats;
  stats.loss_curve.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    ad::TensorPtr total;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const std::size_t pick = static_cast<std::size_t>(rng.next_below(items.size()));
      const TrainItem& item = items[pick];
      SwitchingLoss sl = switching_loss(model, item.s_mel, item.r_mel, item.x_mel, cfg.q, rng);
      (sl.reverb_branch ? stats.reverb_branches : stats.clean_branches) += 1;
      total = total ? ad::add(total, sl.loss) : sl.loss;
    }
    total = ad::scale(total, 1.0 / static_cast<double>(cfg.batch));
    const double loss_value = total->value[0];
    if (!std::isfinite(loss_value)) {
      throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
    }
    for (const ad::TensorPtr& p : params) p->zero_grad();
    ad::backward(total);
    adam_step(params, adam);
    stats.loss_curve.push_back(loss_value);
  }
  return stats;
}

}  // namespace reverbkit
