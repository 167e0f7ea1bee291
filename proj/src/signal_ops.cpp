#include "reverbkit/signal_ops.hpp"

#include <algorithm>
#include <cmath>

#include "reverbkit/fft.hpp"

namespace reverbkit {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

void require_params(const StftParams& p) {
  if (p.frame_length == 0 || p.hop == 0) {
    throw std::invalid_argument("stft: frame_length and hop must be > 0");
  }
  if (p.fft_size < p.frame_length) {
    throw std::invalid_argument("stft: fft_size must be >= frame_length");
  }
  if (p.hop > p.frame_length) {
    throw std::invalid_argument("stft: hop must be <= frame_length");
  }
  if ((p.fft_size & (p.fft_size - 1)) != 0) {
    throw std::invalid_argument("stft: fft_size must be a power of two");
  }
}

std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

StftParams StftParams::for_rate(double sample_rate) {
  StftParams p;
  p.frame_length = static_cast<std::size_t>(std::lround(0.050 * sample_rate));
  p.hop = static_cast<std::size_t>(std::lround(0.0125 * sample_rate));
  if (p.frame_length == 0) p.frame_length = 1;
  if (p.hop == 0) p.hop = 1;
  p.fft_size = next_pow2(p.frame_length);
  p.window = WindowKind::Hann;
  return p;
}

ComplexSpectrogram stft(const Waveform& w, const StftParams& p) {
  require_valid(w, "stft");
  if (w.empty()) throw std::invalid_argument("stft: empty waveform");
  require_params(p);

  const std::size_t n = w.size();
  const std::size_t num_frames =
      n >= p.frame_length ? (n - p.frame_length) / p.hop + 1 : 1;
  const std::vector<double> window = make_window(p.window, p.frame_length);

  ComplexSpectrogram out;
  out.frames = num_frames;
  out.bins = p.fft_size / 2 + 1;
  out.data.resize(out.frames * out.bins);

  std::vector<std::complex<double>> buf(p.fft_size);
  for (std::size_t f = 0; f < num_frames; ++f) {
    const std::size_t start = f * p.hop;
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    const std::size_t valid = std::min(p.frame_length, n - start);
    for (std::size_t i = 0; i < valid; ++i) {
      buf[i] = window[i] * w.samples[start + i];
    }
    fft_inplace(buf, false);
    for (std::size_t b = 0; b < out.bins; ++b) out.at(f, b) = buf[b];
  }
  return out;
}

Matrix mel_filterbank(std::size_t n_mels, std::size_t fft_size, double sample_rate) {
  if (n_mels == 0) throw std::invalid_argument("mel_filterbank: n_mels must be >= 1");
  const std::size_t bins = fft_size / 2 + 1;
  const double mel_max = hz_to_mel(sample_rate / 2.0);

  std::vector<double> edges_hz(n_mels + 2);
  for (std::size_t i = 0; i < edges_hz.size(); ++i) {
    edges_hz[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }

  Matrix fb(n_mels, bins, 0.0);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      if (f > lo && f < mid) {
        fb.at(m, k) = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        fb.at(m, k) = (hi - f) / (hi - mid);
      }
    }
  }
  return fb;
}

LogMelSpectrogram log_mel(const Waveform& w, const StftParams& p, std::size_t n_mels,
                          double floor) {
  if (n_mels == 0) throw std::invalid_argument("log_mel: n_mels must be >= 1");
  if (!(floor > 0.0)) throw std::invalid_argument("log_mel: floor must be > 0");

  const ComplexSpectrogram spec = stft(w, p);
  const Matrix fb = mel_filterbank(n_mels, p.fft_size, w.sample_rate);

  LogMelSpectrogram out;
  out.frames = Matrix(spec.frames, n_mels);
  out.frame_hop = p.hop;
  out.sample_rate = w.sample_rate;

  std::vector<double> power(spec.bins);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t b = 0; b < spec.bins; ++b) power[b] = std::norm(spec.at(f, b));
    for (std::size_t m = 0; m < n_mels; ++m) {
      double e = 0.0;
      const double* weights = &fb.data[m * fb.cols];
      for (std::size_t b = 0; b < spec.bins; ++b) e += weights[b] * power[b];
      out.frames.at(f, m) = std::log(std::max(e, floor));
    }
  }
  return out;
}

Waveform convolve(const Waveform& x, const Waveform& h) {
  require_valid(x, "convolve");
  require_valid(h, "convolve");
  if (x.sample_rate != h.sample_rate) {
    throw std::invalid_argument("convolve: sample-rate mismatch");
  }
  if (x.empty() || h.empty()) throw std::invalid_argument("convolve: empty input");

  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<std::complex<double>> a(n), b(n);
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = x.samples[i];
  for (std::size_t i = 0; i < h.size(); ++i) b[i] = h.samples[i];
  fft_inplace(a, false);
  fft_inplace(b, false);
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
  fft_inplace(a, true);

  Waveform out;
  out.sample_rate = x.sample_rate;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out.samples[i] = a[i].real();
  return out;
}

namespace {

// Noise aligned to the signal length: crop when long enough, otherwise tile
// circularly starting at `offset`.
std::vector<double> aligned_noise(const Waveform& signal, const Waveform& noise,
                                  std::size_t offset) {
  const std::size_t n = signal.size();
  std::vector<double> out(n);
  const std::size_t len = noise.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = noise.samples[(offset + i) % len];
  return out;
}

}  // namespace

double snr_noise_gain(const Waveform& signal, const Waveform& noise, double snr_db,
                      std::size_t noise_offset) {
  require_valid(signal, "mix_at_snr");
  require_valid(noise, "mix_at_snr");
  if (signal.sample_rate != noise.sample_rate) {
    throw std::invalid_argument("mix_at_snr: sample-rate mismatch");
  }
  if (signal.empty()) throw std::invalid_argument("mix_at_snr: empty signal");
  if (noise.empty()) throw std::invalid_argument("mix_at_snr: empty noise");

  const double p_signal = mean_power(signal.samples);
  if (p_signal <= 0.0) throw std::invalid_argument("mix_at_snr: signal has zero power");
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;

  const std::vector<double> n = aligned_noise(signal, noise, noise_offset);
  const double p_noise = mean_power(n);
  if (p_noise <= 0.0) {
    throw std::invalid_argument("mix_at_snr: noise has zero power over the mixed region");
  }
  return std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));
}

Waveform mix_at_snr(const Waveform& signal, const Waveform& noise, double snr_db,
                    std::size_t noise_offset) {
  const double gain = snr_noise_gain(signal, noise, snr_db, noise_offset);
  Waveform out = signal;
  if (gain == 0.0) return out;
  const std::vector<double> n = aligned_noise(signal, noise, noise_offset);
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += gain * n[i];
  return out;
}

}  // namespace reverbkit
