#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "reverbkit/rng.hpp"
#include "reverbkit/signal_ops.hpp"

using namespace reverbkit;

namespace {

Waveform make_noise(std::size_t n, double rate, uint64_t seed, double amp = 0.5) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  Rng rng(seed);
  for (auto& s : w.samples) s = amp * rng.uniform(-1.0, 1.0);
  return w;
}

/// O(N*K) reference convolution, the oracle for the FFT-based implementation.
std::vector<double> convolve_direct(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

TEST_CASE("stft frame count follows the hop grid") {
  StftParams p;
  p.frame_length = 1200;
  p.hop = 300;
  p.fft_size = 2048;

  Waveform w = make_noise(1200 + 3 * 300 + 1, 24000.0, 1);
  CHECK(stft(w, p).frames == 4);

  w = make_noise(1200, 24000.0, 1);
  CHECK(stft(w, p).frames == 1);

  // Shorter than one frame: a single zero-padded frame.
  w = make_noise(700, 24000.0, 1);
  CHECK(stft(w, p).frames == 1);
}

TEST_CASE("stft of silence is silent") {
  Waveform w;
  w.sample_rate = 24000.0;
  w.samples.assign(4000, 0.0);
  const auto spec = stft(w, StftParams{});
  for (const auto& bin : spec.data) CHECK(std::abs(bin) == 0.0);
}

TEST_CASE("stft concentrates a bin-centred sine in its bin") {
  // With a rectangular window and frame == fft size, the DFT of a
  // bin-centred sine has exactly two nonzero bins; we only keep the
  // non-negative-frequency half.
  StftParams p;
  p.frame_length = 256;
  p.hop = 256;
  p.fft_size = 256;
  p.window = WindowKind::Rectangular;

  const std::size_t k = 19;
  Waveform w;
  w.sample_rate = 8000.0;
  w.samples.resize(256);
  for (int i = 0; i < 256; ++i)
    w.samples[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) * i / 256.0);

  const auto spec = stft(w, p);
  REQUIRE(spec.frames == 1);
  CHECK(std::abs(spec.at(0, k)) == doctest::Approx(128.0).epsilon(1e-9));
  for (std::size_t b = 0; b < spec.bins; ++b) {
    if (b == k) continue;
    CHECK(std::abs(spec.at(0, b)) < 1e-9);
  }
}

TEST_CASE("stft preserves energy per frame (Parseval)") {
  StftParams p;
  p.frame_length = 512;
  p.hop = 512;
  p.fft_size = 512;
  p.window = WindowKind::Rectangular;

  const Waveform w = make_noise(2048, 16000.0, 7);
  const auto spec = stft(w, p);
  REQUIRE(spec.frames == 4);

  for (std::size_t t = 0; t < 4; ++t) {
    double time_energy = 0.0;
    for (std::size_t i = 0; i < 512; ++i) {
      const double s = w.samples[t * 512 + i];
      time_energy += s * s;
    }
    // Reconstruct the full-spectrum sum from the stored non-negative bins.
    double freq_energy = std::norm(spec.at(t, 0)) + std::norm(spec.at(t, spec.bins - 1));
    for (std::size_t b = 1; b + 1 < spec.bins; ++b) freq_energy += 2.0 * std::norm(spec.at(t, b));
    CHECK(freq_energy / 512.0 == doctest::Approx(time_energy).epsilon(1e-9));
  }
}

TEST_CASE("log mel of silence sits at the floor") {
  Waveform w;
  w.sample_rate = 24000.0;
  w.samples.assign(3600, 0.0);
  const auto mel = log_mel(w, StftParams{});
  const double expected = std::log(kDefaultMelFloor);
  for (double v : mel.frames.data) CHECK(v == doctest::Approx(expected));
}

TEST_CASE("doubling the waveform adds ln(4) to every log mel entry") {
  Waveform w = make_noise(24000, 24000.0, 11, 0.4);
  Waveform w2 = w;
  for (auto& s : w2.samples) s *= 2.0;

  const auto a = log_mel(w, StftParams{});
  const auto b = log_mel(w2, StftParams{});
  REQUIRE(a.frames.data.size() == b.frames.data.size());
  const double ln4 = std::log(4.0);
  for (std::size_t i = 0; i < a.frames.data.size(); ++i) {
    CHECK(b.frames.data[i] - a.frames.data[i] == doctest::Approx(ln4).epsilon(1e-9));
  }
}

TEST_CASE("log mel equals the filterbank applied to the power spectrum") {
  const Waveform w = make_noise(12000, 24000.0, 13, 0.4);
  const StftParams p = StftParams::for_rate(w.sample_rate);
  const auto spec = stft(w, p);
  const auto fb = mel_filterbank(64, p.fft_size, w.sample_rate);
  const auto mel = log_mel(w, p, 64);

  REQUIRE(mel.frames.rows == spec.frames);
  REQUIRE(mel.frames.cols == 64);
  REQUIRE(fb.cols == spec.bins);

  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t m = 0; m < 64; ++m) {
      double e = 0.0;
      for (std::size_t b = 0; b < spec.bins; ++b) e += fb.at(m, b) * std::norm(spec.at(t, b));
      const double expected = std::log(std::max(e, kDefaultMelFloor));
      CHECK(mel.frames.at(t, m) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("mel filterbank rows are non-negative and cover the band") {
  const auto fb = mel_filterbank(128, 2048, 24000.0);
  REQUIRE(fb.rows == 128);
  double row_min = 1e300;
  for (std::size_t m = 0; m < fb.rows; ++m) {
    double row_sum = 0.0;
    for (std::size_t b = 0; b < fb.cols; ++b) {
      CHECK(fb.at(m, b) >= 0.0);
      row_sum += fb.at(m, b);
    }
    row_min = std::min(row_min, row_sum);
  }
  // Every band must respond to something; otherwise log mel rows go dead.
  CHECK(row_min > 0.0);
}

TEST_CASE("convolve matches the direct reference") {
  Rng rng(17);
  std::vector<double> a(1000), b(100);
  for (auto& v : a) v = rng.uniform(-1.0, 1.0);
  for (auto& v : b) v = rng.uniform(-1.0, 1.0);

  const Waveform wa(a, 24000.0);
  const Waveform wb(b, 24000.0);
  const auto got = convolve(wa, wb);
  const auto expect = convolve_direct(a, b);
  REQUIRE(got.size() == expect.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < expect.size(); ++i)
    max_err = std::max(max_err, std::abs(got.samples[i] - expect[i]));
  CHECK(max_err < 1e-9);
}

TEST_CASE("convolving with a unit impulse is the identity") {
  const Waveform w = make_noise(500, 24000.0, 19);
  const auto out = convolve(w, Waveform({1.0}, 24000.0));
  REQUIRE(out.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(out.samples[i] == doctest::Approx(w.samples[i]).epsilon(1e-12));
}

TEST_CASE("convolving with a delayed impulse shifts the signal") {
  const Waveform w = make_noise(300, 24000.0, 23);
  std::vector<double> kernel(11, 0.0);
  kernel[10] = 1.0;
  const auto out = convolve(w, Waveform(kernel, 24000.0));
  REQUIRE(out.size() == w.size() + 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(out.samples[i]) < 1e-12);
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(out.samples[i + 10] == doctest::Approx(w.samples[i]).epsilon(1e-12));
}

TEST_CASE("convolution is linear in its first argument") {
  const Waveform x = make_noise(400, 24000.0, 29);
  const Waveform y = make_noise(400, 24000.0, 31);
  Waveform sum = x;
  for (std::size_t i = 0; i < sum.size(); ++i) sum.samples[i] += y.samples[i];

  Rng rng(37);
  std::vector<double> kernel(64);
  for (auto& v : kernel) v = rng.uniform(-0.5, 0.5);
  const Waveform h(kernel, 24000.0);

  const auto cx = convolve(x, h);
  const auto cy = convolve(y, h);
  const auto cs = convolve(sum, h);
  for (std::size_t i = 0; i < cs.size(); ++i)
    CHECK(cs.samples[i] == doctest::Approx(cx.samples[i] + cy.samples[i]).epsilon(1e-9));
}

TEST_CASE("mix_at_snr produces the requested ratio") {
  const Waveform s = make_noise(8000, 24000.0, 41, 0.3);
  const Waveform n = make_noise(8000, 24000.0, 43, 0.7);

  for (double target : {-5.0, 0.0, 10.0, 25.0}) {
    const Waveform mixed = mix_at_snr(s, n, target, 0);
    REQUIRE(mixed.size() == s.size());
    // Recover the scaled-noise component and measure the achieved ratio.
    double p_noise = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double g_n = mixed.samples[i] - s.samples[i];
      p_noise += g_n * g_n;
    }
    p_noise /= static_cast<double>(s.size());
    const double achieved = 10.0 * std::log10(mean_power(s.samples) / p_noise);
    CHECK(achieved == doctest::Approx(target).epsilon(1e-9));
  }
}

TEST_CASE("mix at equal powers uses unit gain") {
  Waveform s = make_noise(2048, 24000.0, 47, 0.5);
  Waveform n = s;
  std::reverse(n.samples.begin(), n.samples.end());
  CHECK(snr_noise_gain(s, n, 0.0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  const Waveform mixed = mix_at_snr(s, n, 0.0, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(mixed.samples[i] == doctest::Approx(s.samples[i] + n.samples[i]).epsilon(1e-12));
  }
}

TEST_CASE("infinite snr returns the signal untouched") {
  const Waveform s = make_noise(1000, 24000.0, 53);
  const Waveform n = make_noise(1000, 24000.0, 59);
  const Waveform mixed = mix_at_snr(s, n, kInfiniteSnrDb, 123);
  REQUIRE(mixed.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(mixed.samples[i] == s.samples[i]);
}

TEST_CASE("short noise is tiled circularly from the offset") {
  Waveform s = make_noise(10, 24000.0, 61, 0.5);
  const Waveform n({1.0, 2.0, 3.0}, 24000.0);

  const std::size_t offset = 2;
  const Waveform mixed = mix_at_snr(s, n, 0.0, offset);
  // Derive the gain from the first sample, then check the circular pattern.
  const double g = (mixed.samples[0] - s.samples[0]) / n.samples[offset % 3];
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double expect = s.samples[i] + g * n.samples[(offset + i) % 3];
    CHECK(mixed.samples[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("mixing rejects degenerate inputs") {
  Waveform zero;
  zero.sample_rate = 24000.0;
  zero.samples.assign(100, 0.0);
  const Waveform s = make_noise(100, 24000.0, 67);
  CHECK_THROWS_AS(mix_at_snr(zero, s, 10.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(mix_at_snr(s, zero, 10.0, 0), std::invalid_argument);

  Waveform other_rate = make_noise(100, 16000.0, 71);
  CHECK_THROWS_AS(mix_at_snr(s, other_rate, 10.0, 0), std::invalid_argument);
}

TEST_CASE("convolve rejects empty or mismatched inputs") {
  Waveform empty;
  empty.sample_rate = 24000.0;
  const Waveform s = make_noise(10, 24000.0, 73);
  CHECK_THROWS_AS(convolve(empty, Waveform({1.0}, 24000.0)), std::invalid_argument);
  CHECK_THROWS_AS(convolve(s, empty), std::invalid_argument);
  CHECK_THROWS_AS(convolve(s, Waveform({1.0}, 16000.0)), std::invalid_argument);
}
