// common.hpp -- basic value types shared across the toolkit.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace reverbkit {

inline constexpr const char* kToolVersion = "0.1.0";

/// Mono PCM signal. Samples are dimensionless amplitudes, nominally in
/// [-1, 1]; sample_rate is in Hz.
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 24000.0;

  Waveform() = default;
  Waveform(std::vector<double> s, double rate) : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const { return sample_rate > 0 ? samples.size() / sample_rate : 0.0; }
  double& operator[](std::size_t i) { return samples[i]; }
  double operator[](std::size_t i) const { return samples[i]; }
};

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return data.size(); }
};

/// Throws std::invalid_argument unless the waveform has a positive sample
/// rate and all samples are finite.
void require_valid(const Waveform& w, const char* who);

/// Mean squared amplitude. Zero for an empty signal.
double mean_power(const std::vector<double>& samples);

inline double db_from_power_ratio(double num, double den) {
  return 10.0 * std::log10(num / den);
}

}  // namespace reverbkit
