// model.hpp -- trainable reverb-feature encoder and conditional log-mel
// decoder, plus the stochastic switching loss and Adam training loop.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reverbkit/autodiff.hpp"
#include "reverbkit/common.hpp"
#include "reverbkit/rng.hpp"
#include "reverbkit/signal_ops.hpp"

namespace reverbkit {

struct ModelConfig {
  std::size_t n_mels = kDefaultMelBands;
  std::size_t hidden = 32;
  std::size_t feature_dim = 16;  // dimension of the reverb feature c
  std::size_t conv_kernel = 5;
  // Log-mel inputs are normalized as (x + mel_offset) / mel_scale before the
  // first layer; decoder outputs invert the mapping.
  double mel_offset = 10.0;
  double mel_scale = 5.0;
};

// Encoder: per-frame affine stack, depthwise temporal conv (kernel 5), two
// more affine layers, mean pooling over time, linear head to feature_dim.
// Decoder: per-frame map of [clean mel frame ++ broadcast feature] through
// three affine layers back to a mel frame. Parameters are held as autodiff
// leaves in a fixed, named order that the checkpoint format reuses.
struct ReverbModel {
  ModelConfig cfg;
  std::vector<std::pair<std::string, ad::TensorPtr>> params;

  const ad::TensorPtr& find(const std::string& name) const;
  std::vector<ad::TensorPtr> trainable() const;
  std::size_t parameter_count() const;
};

ReverbModel make_model(const ModelConfig& cfg, std::uint64_t seed);

// Graph-building forward passes. encode_graph returns a 1 x feature_dim
// tensor; frame_mask (optional, nonzero = keep) restricts mean pooling.
// decode_graph conditions on `c`, or on a zero vector when c is null, and
// returns a T x n_mels tensor.
ad::TensorPtr encode_graph(const ReverbModel& model, const Matrix& x_mel,
                           const std::vector<std::uint8_t>* frame_mask = nullptr);
ad::TensorPtr decode_graph(const ReverbModel& model, const Matrix& clean_mel,
                           const ad::TensorPtr& c);

// Plain (no-grad surface) conveniences.
std::vector<double> encode(const ReverbModel& model, const LogMelSpectrogram& x_mel);
Matrix decode(const ReverbModel& model, const Matrix& clean_mel, const std::vector<double>& c);

// L1 + squared L2 + target-normalized squared L2, summed over all entries.
// Throws when the target is all zero (the normalized term is undefined).
double spectral_recon_loss(const Matrix& target, const Matrix& pred);
ad::TensorPtr spectral_recon_loss_graph(const Matrix& target, const ad::TensorPtr& pred);

// One training example of the switching objective: with probability 1-q the
// loss compares decode(s_mel, encode(x_mel)) against the reverberant target,
// otherwise decode(s_mel, 0) against the clean target (the encoder is not
// evaluated at all on that branch, so its gradients are exactly zero).
struct SwitchingLoss {
  ad::TensorPtr loss;
  bool reverb_branch = true;
};
SwitchingLoss switching_loss(const ReverbModel& model, const Matrix& s_mel,
                             const Matrix& r_mel, const Matrix& x_mel, double q, Rng& rng);

struct AdamConfig {
  double lr = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  std::size_t warmup_steps = 200;  // linear ramp: lr(t) = lr * min(1, t/warmup)
};

struct AdamState {
  AdamConfig cfg;
  std::size_t step = 0;
  std::vector<std::vector<double>> m, v;

  void init(const std::vector<ad::TensorPtr>& params);
};

// Bias-corrected Adam with linear warmup, applied from each tensor's grad.
void adam_step(const std::vector<ad::TensorPtr>& params, AdamState& state);

struct TrainItem {
  Matrix s_mel;  // clean log-mel (target of the clean branch, decoder input)
  Matrix r_mel;  // reverberant log-mel (target of the reverb branch)
  Matrix x_mel;  // degraded log-mel (encoder input)
  std::string rir_id;
  std::string utterance_id;
};

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch = 8;
  double q = 0.1;
  std::uint64_t seed = 1;
  AdamConfig adam;
};

struct TrainStats {
  std::vector<double> loss_curve;  // mean batch loss per step
  std::size_t clean_branches = 0;
  std::size_t reverb_branches = 0;
};

// Deterministic single-threaded training loop: (seed, config, items) fixes
// the batch order, branch draws, and therefore the loss curve bit for bit.
// Throws on a non-finite loss, naming the offending step.
TrainStats train(ReverbModel& model, const std::vector<TrainItem>& items,
                 const TrainConfig& cfg);

}  // namespace reverbkit
