// signal_ops.hpp -- STFT, log-mel extraction, convolution, SNR mixing.
#pragma once

#include <complex>
#include <limits>

#include "reverbkit/common.hpp"

namespace reverbkit {

enum class WindowKind { Hann, Rectangular };

/// STFT analysis settings. Defaults are 50 ms frames with a 12.5 ms hop and
/// a Hann window; fft_size is the next power of two at or above the frame.
struct StftParams {
  std::size_t frame_length = 1200;
  std::size_t hop = 300;
  std::size_t fft_size = 2048;
  WindowKind window = WindowKind::Hann;

  /// Defaults scaled to a sample rate (frame 50 ms, hop 12.5 ms).
  static StftParams for_rate(double sample_rate);
};

struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;  // fft_size/2 + 1
  std::vector<std::complex<double>> data;

  std::complex<double>& at(std::size_t f, std::size_t b) { return data[f * bins + b]; }
  std::complex<double> at(std::size_t f, std::size_t b) const { return data[f * bins + b]; }
};

/// Log-mel features: frames x mel-bands matrix of natural-log mel energies.
struct LogMelSpectrogram {
  Matrix frames;  // T x M
  std::size_t frame_hop = 0;
  double sample_rate = 0.0;

  std::size_t num_frames() const { return frames.rows; }
  std::size_t num_mels() const { return frames.cols; }
};

inline constexpr double kInfiniteSnrDb = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultMelFloor = 1e-10;
inline constexpr std::size_t kDefaultMelBands = 128;

/// Short-time Fourier transform. Frames start at multiples of hop; a signal
/// shorter than one frame yields a single zero-padded frame. Throws on an
/// empty waveform or inconsistent params.
ComplexSpectrogram stft(const Waveform& w, const StftParams& p);

/// Triangular mel filterbank on the HTK mel scale, spanning [0, rate/2].
/// Returns an n_mels x (fft_size/2+1) weight matrix applied to power spectra.
Matrix mel_filterbank(std::size_t n_mels, std::size_t fft_size, double sample_rate);

/// Log-mel energies: entry = ln(max(mel_energy, floor)).
LogMelSpectrogram log_mel(const Waveform& w, const StftParams& p,
                          std::size_t n_mels = kDefaultMelBands,
                          double floor = kDefaultMelFloor);

/// Full linear convolution (FFT-accelerated); output length is
/// len(x) + len(h) - 1. Sample rates must match.
Waveform convolve(const Waveform& x, const Waveform& h);

/// Scales noise so that 10*log10(P_signal / P_noise) equals snr_db over the
/// mixed region and returns signal + scaled noise. Noise longer than the
/// signal is cropped; shorter noise is tiled starting at a circular offset.
/// snr_db = +infinity returns the signal unchanged.
Waveform mix_at_snr(const Waveform& signal, const Waveform& noise, double snr_db,
                    std::size_t noise_offset = 0);

/// The gain applied to the noise by mix_at_snr for the same arguments.
double snr_noise_gain(const Waveform& signal, const Waveform& noise, double snr_db,
                      std::size_t noise_offset = 0);

}  // namespace reverbkit
