#include "reverbkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reverbkit {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kF0Min = 50.0, kF0Max = 500.0;
constexpr double kVoicedClarity = 0.5;
constexpr double kYinThreshold = 0.3;

void require_comparable(const Waveform& ref, const Waveform& hyp, const char* who) {
  require_valid(ref, who);
  require_valid(hyp, who);
  if (ref.sample_rate != hyp.sample_rate) {
    throw std::invalid_argument(std::string(who) + ": sample rates differ");
  }
  const double longer = std::max(ref.duration_s(), hyp.duration_s());
  const double shorter = std::min(ref.duration_s(), hyp.duration_s());
  if (longer > 0.0 && (longer - shorter) / longer > 0.10) {
    throw std::invalid_argument(std::string(who) + ": durations differ by more than 10%");
  }
}
}  // namespace

Matrix mfcc(const Waveform& w, std::size_t n_coef) {
  if (n_coef == 0) throw std::invalid_argument("mfcc: need at least one coefficient");
  const StftParams params = StftParams::for_rate(w.sample_rate);
  const LogMelSpectrogram mel = log_mel(w, params);
  const std::size_t M = mel.num_mels();
  if (n_coef > M) throw std::invalid_argument("mfcc: more coefficients than mel bands");

  // Orthonormal DCT-II basis rows.
  Matrix basis(n_coef, M);
  for (std::size_t k = 0; k < n_coef; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / static_cast<double>(M))
                                : std::sqrt(2.0 / static_cast<double>(M));
    for (std::size_t m = 0; m < M; ++m) {
      basis.at(k, m) = scale * std::cos(kPi * static_cast<double>(k) *
                                        (static_cast<double>(m) + 0.5) / static_cast<double>(M));
    }
  }

  Matrix out(mel.num_frames(), n_coef);
  for (std::size_t t = 0; t < mel.num_frames(); ++t) {
    for (std::size_t k = 0; k < n_coef; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < M; ++m) acc += basis.at(k, m) * mel.frames.at(t, m);
      out.at(t, k) = acc;
    }
  }
  return out;
}

double mcd_from_cepstra(const Matrix& ref, const Matrix& hyp) {
  if (ref.cols != hyp.cols || ref.cols < 2) {
    throw std::invalid_argument("mcd: cepstra need matching widths of at least 2");
  }
  const std::size_t frames = std::min(ref.rows, hyp.rows);
  if (frames == 0) throw std::invalid_argument("mcd: no frames to compare");

  const double k_mcd = 10.0 / std::log(10.0);
  double total = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    double acc = 0.0;
    for (std::size_t d = 1; d < ref.cols; ++d) {
      const double delta = ref.at(t, d) - hyp.at(t, d);
      acc += delta * delta;
    }
    total += k_mcd * std::sqrt(2.0 * acc);
  }
  return total / static_cast<double>(frames);
}

double mcd(const Waveform& ref, const Waveform& hyp) {
  require_comparable(ref, hyp, "mcd");
  return mcd_from_cepstra(mfcc(ref), mfcc(hyp));
}

PitchTrack pitch_track(const Waveform& w) {
  require_valid(w, "pitch_track");
  const double fs = w.sample_rate;
  const auto window = static_cast<std::size_t>(std::llround(0.040 * fs));
  const auto hop = static_cast<std::size_t>(std::llround(0.010 * fs));
  const auto tau_min = static_cast<std::size_t>(std::floor(fs / kF0Max));
  const auto tau_max = static_cast<std::size_t>(std::ceil(fs / kF0Min));

  PitchTrack track;
  track.hop_s = hop / fs;
  if (tau_min < 1 || tau_max <= tau_min || window == 0) return track;

  std::vector<double> diff(tau_max + 1, 0.0);
  std::vector<double> cmnd(tau_max + 1, 1.0);
  const std::size_t n = w.size();
  for (std::size_t start = 0; start + window + tau_max <= n; start += hop) {
    const double* x = w.samples.data() + start;
    double running = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      double d = 0.0;
      for (std::size_t j = 0; j < window; ++j) {
        const double delta = x[j] - x[j + tau];
        d += delta * delta;
      }
      diff[tau] = d;
      running += d;
      cmnd[tau] = running > 0.0 ? d * static_cast<double>(tau) / running : 1.0;
    }

    // First dip under the absolute threshold (walked to its local minimum)
    // wins; otherwise fall back to the global minimum. This prefers the true
    // period over its deeper multiples.
    std::size_t best = 0;
    for (std::size_t tau = tau_min; tau <= tau_max; ++tau) {
      if (cmnd[tau] < kYinThreshold) {
        while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
        best = tau;
        break;
      }
    }
    if (best == 0) {
      best = tau_min;
      for (std::size_t tau = tau_min + 1; tau <= tau_max; ++tau) {
        if (cmnd[tau] < cmnd[best]) best = tau;
      }
    }

    double refined = static_cast<double>(best);
    if (best > tau_min && best < tau_max) {
      const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
      const double denom = a - 2.0 * b + c;
      if (denom > 0.0) {
        const double shift = 0.5 * (a - c) / denom;
        if (std::abs(shift) <= 1.0) refined += shift;
      }
    }

    const double f0 = fs / refined;
    const double clarity = 1.0 - cmnd[best];
    const bool voiced = clarity > kVoicedClarity && f0 >= kF0Min && f0 <= kF0Max;
    track.f0_hz.push_back(f0);
    track.voiced.push_back(voiced ? 1 : 0);
  }
  return track;
}

GpeResult gpe(const Waveform& ref, const Waveform& hyp, double threshold) {
  require_comparable(ref, hyp, "gpe");
  if (!(threshold > 0.0)) throw std::invalid_argument("gpe: threshold must be > 0");
  const PitchTrack tr = pitch_track(ref);
  const PitchTrack th = pitch_track(hyp);
  const std::size_t frames = std::min(tr.f0_hz.size(), th.f0_hz.size());

  GpeResult out;
  std::size_t gross = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    if (!tr.voiced[t] || !th.voiced[t]) continue;
    ++out.joint_voiced_frames;
    if (std::abs(th.f0_hz[t] - tr.f0_hz[t]) / tr.f0_hz[t] > threshold) ++gross;
  }
  if (out.joint_voiced_frames == 0) {
    out.no_joint_voiced = true;
    out.value = 0.0;
  } else {
    out.value = static_cast<double>(gross) / static_cast<double>(out.joint_voiced_frames);
  }
  return out;
}

}  // namespace reverbkit
