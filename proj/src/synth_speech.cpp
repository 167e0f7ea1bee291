#include "reverbkit/synth_speech.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace reverbkit {

namespace {
constexpr double kTwoPi = 6.28318530717958647692528676655900577;
}

Waveform synth_utterance(double duration_s, double sample_rate, Rng& rng) {
  if (!(duration_s > 0.0) || !(sample_rate > 0.0)) {
    throw std::invalid_argument("synth_utterance: duration and sample rate must be > 0");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));

  // Per-utterance voice parameters.
  const double f0_base = rng.uniform(90.0, 220.0);
  const double drift_rate = rng.uniform(0.5, 2.0);
  const double drift_phase = rng.uniform(0.0, kTwoPi);
  const double formant1 = rng.uniform(300.0, 800.0);
  const double formant2 = rng.uniform(1000.0, 2200.0);
  const double syllable_rate = rng.uniform(2.5, 5.0);
  const double syllable_phase = rng.uniform(0.0, kTwoPi);
  const double noise_level = rng.uniform(0.01, 0.03);

  const double max_harmonic_hz = std::min(4000.0, 0.45 * sample_rate);
  const int n_harmonics = std::max(1, static_cast<int>(max_harmonic_hz / f0_base));
  std::vector<double> harmonic_gain(static_cast<std::size_t>(n_harmonics));
  for (int k = 1; k <= n_harmonics; ++k) {
    const double f = k * f0_base;
    const double res1 = std::exp(-0.5 * std::pow((f - formant1) / 150.0, 2.0));
    const double res2 = std::exp(-0.5 * std::pow((f - formant2) / 250.0, 2.0));
    harmonic_gain[static_cast<std::size_t>(k - 1)] = (0.3 + res1 + 0.6 * res2) / k;
  }

  std::vector<double> phase(static_cast<std::size_t>(n_harmonics), 0.0);
  std::vector<double> out(n, 0.0);
  const double edge = std::min(0.05 * sample_rate, n / 4.0);  // 50 ms fade in/out
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / sample_rate;
    const double f0 = f0_base * (1.0 + 0.08 * std::sin(kTwoPi * drift_rate * t + drift_phase));
    double v = 0.0;
    for (int k = 1; k <= n_harmonics; ++k) {
      double& ph = phase[static_cast<std::size_t>(k - 1)];
      ph += kTwoPi * k * f0 / sample_rate;
      if (ph > kTwoPi) ph -= kTwoPi;
      v += harmonic_gain[static_cast<std::size_t>(k - 1)] * std::sin(ph);
    }
    // Syllabic modulation that never fully closes, plus edge fades.
    double env = 0.65 + 0.35 * std::sin(kTwoPi * syllable_rate * t + syllable_phase);
    const double di = static_cast<double>(i);
    if (di < edge) env *= di / edge;
    if (di > n - 1 - edge) env *= (n - 1 - di) / edge;
    out[i] = env * (v + noise_level * rng.normal());
    peak = std::max(peak, std::abs(out[i]));
  }
  if (peak > 0.0) {
    const double gain = 0.25 / peak;
    for (double& v : out) v *= gain;
  }
  return {std::move(out), sample_rate};
}

Waveform synth_noise(double duration_s, double sample_rate, Rng& rng) {
  if (!(duration_s > 0.0) || !(sample_rate > 0.0)) {
    throw std::invalid_argument("synth_noise: duration and sample rate must be > 0");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> out(n);
  double lowpassed = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double white = rng.normal();
    lowpassed = 0.98 * lowpassed + 0.02 * white;
    out[i] = 0.3 * white + 12.0 * lowpassed;
    sum_sq += out[i] * out[i];
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(n));
  if (rms > 0.0) {
    const double gain = 0.1 / rms;
    for (double& v : out) v *= gain;
  }
  return {std::move(out), sample_rate};
}

}  // namespace reverbkit
