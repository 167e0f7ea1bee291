// metrics.hpp -- objective evaluation: mel-cepstral distortion and gross
// pitch error against a time-aligned reference.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "reverbkit/common.hpp"
#include "reverbkit/signal_ops.hpp"

namespace reverbkit {

// MFCCs: orthonormal DCT-II of the 128-band natural-log mel spectrogram,
// keeping coefficients 0..n_coef-1. Frames follow the shared STFT defaults
// for the waveform's rate.
Matrix mfcc(const Waveform& w, std::size_t n_coef = 13);

// Mean over frames of (10/ln10) * sqrt(2 * sum_{d=1..12} (c_d^ref-c_d^hyp)^2);
// c0 is excluded. Sample rates must match and durations must agree within
// 10%; comparison runs over the shorter frame count.
double mcd(const Waveform& ref, const Waveform& hyp);

// The same distortion straight from cepstral matrices (frames x coefficients),
// for callers that already hold MFCCs or want a closed-form check.
double mcd_from_cepstra(const Matrix& ref, const Matrix& hyp);

struct PitchTrack {
  std::vector<double> f0_hz;          // per frame; meaningful where voiced
  std::vector<std::uint8_t> voiced;
  double hop_s = 0.010;
};

// Cumulative-mean-normalized autocorrelation difference over 40 ms frames at
// a 10 ms hop, searching 50..500 Hz with parabolic lag refinement. A frame is
// voiced when the normalized minimum is deep enough (clarity > 0.5).
PitchTrack pitch_track(const Waveform& w);

struct GpeResult {
  double value = 0.0;                  // fraction of jointly voiced frames off by > threshold
  std::size_t joint_voiced_frames = 0;
  bool no_joint_voiced = false;        // set when the fraction is vacuous
};

GpeResult gpe(const Waveform& ref, const Waveform& hyp, double threshold = 0.2);

}  // namespace reverbkit
