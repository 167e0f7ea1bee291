#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "reverbkit/common.hpp"
#include "reverbkit/fft.hpp"
#include "reverbkit/rng.hpp"
#include "reverbkit/wav_io.hpp"

using namespace reverbkit;

namespace {
std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("rng is deterministic per seed") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
    all_equal = all_equal && va == vb;
    any_diff = any_diff || va != vc;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("derived seeds are order-independent and distinct") {
  const uint64_t master = 7;
  CHECK(derive_seed(master, 5) == derive_seed(master, 5));
  CHECK(derive_seed(master, 0) != derive_seed(master, 1));
  CHECK(derive_seed(master, 1) != derive_seed(master + 1, 1));
}

TEST_CASE("uniform01 stays in range with a sane mean") {
  Rng rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("next_below covers its range without bias toward a residue") {
  Rng rng(2);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.next_below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  CHECK_THROWS_AS(rng.next_below(0), std::invalid_argument);
}

TEST_CASE("normal draws have the right first two moments") {
  Rng rng(3);
  double sum = 0.0, sum_sq = 0.0;
  constexpr int kN = 200000;
  for (int i = 0; i < kN; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(sum / kN == doctest::Approx(0.0).epsilon(0.02));
  CHECK(sum_sq / kN == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fft of an impulse is flat") {
  std::vector<std::complex<double>> a(16, 0.0);
  a[0] = 1.0;
  fft_inplace(a, false);
  for (const auto& v : a) CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("fft round trip restores the input") {
  Rng rng(4);
  std::vector<std::complex<double>> a(256);
  for (auto& v : a) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  const auto original = a;
  fft_inplace(a, false);
  fft_inplace(a, true);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - original[i]) < 1e-12);
}

TEST_CASE("fft satisfies Parseval") {
  Rng rng(5);
  std::vector<std::complex<double>> a(512);
  double time_energy = 0.0;
  for (auto& v : a) {
    v = {rng.uniform(-1, 1), 0.0};
    time_energy += std::norm(v);
  }
  fft_inplace(a, false);
  double freq_energy = 0.0;
  for (const auto& v : a) freq_energy += std::norm(v);
  CHECK(freq_energy / a.size() == doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("fft rejects non-power-of-two sizes") {
  std::vector<std::complex<double>> a(12);
  CHECK_THROWS_AS(fft_inplace(a, false), std::invalid_argument);
}

TEST_CASE("float32 wav round trip is exact for float-representable samples") {
  Waveform w;
  w.sample_rate = 24000.0;
  for (int i = 0; i < 1000; ++i) w.samples.push_back(static_cast<float>(std::sin(i * 0.05)));
  const std::string path = temp_path("rk_test_f32.wav");
  write_wav(path, w, WavEncoding::Float32);
  const Waveform r = read_wav(path);
  REQUIRE(r.size() == w.size());
  CHECK(r.sample_rate == w.sample_rate);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(r.samples[i] == w.samples[i]);
  std::filesystem::remove(path);
}

TEST_CASE("pcm16 wav round trip is within one quantization step") {
  Waveform w;
  w.sample_rate = 16000.0;
  for (int i = 0; i < 1000; ++i) w.samples.push_back(0.9 * std::sin(i * 0.07));
  const std::string path = temp_path("rk_test_pcm.wav");
  write_wav(path, w, WavEncoding::Pcm16);
  const Waveform r = read_wav(path);
  REQUIRE(r.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(std::abs(r.samples[i] - w.samples[i]) <= 0.5 / 32768.0 + 1e-12);
  }
  std::filesystem::remove(path);
}

TEST_CASE("multi-channel wav files are rejected") {
  // Minimal stereo PCM16 header with a single frame of zeros.
  const std::string path = temp_path("rk_test_stereo.wav");
  {
    std::ofstream out(path, std::ios::binary);
    auto u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
    out.write("RIFF", 4);
    u32(36 + 4);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(1);      // PCM
    u16(2);      // stereo
    u32(8000);   // rate
    u32(32000);  // byte rate
    u16(4);      // block align
    u16(16);     // bits
    out.write("data", 4);
    u32(4);
    u32(0);
  }
  CHECK_THROWS_AS(read_wav(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("reading a missing wav throws") {
  CHECK_THROWS_AS(read_wav(temp_path("rk_definitely_missing.wav")), std::runtime_error);
}

TEST_CASE("require_valid rejects bad waveforms") {
  Waveform w;
  w.sample_rate = 0.0;
  CHECK_THROWS_AS(require_valid(w, "test"), std::invalid_argument);
  w.sample_rate = 8000.0;
  w.samples = {0.0, std::nan("")};
  CHECK_THROWS_AS(require_valid(w, "test"), std::invalid_argument);
  w.samples = {0.0, 0.5};
  CHECK_NOTHROW(require_valid(w, "test"));
}

TEST_CASE("mean_power matches the definition") {
  CHECK(mean_power({}) == 0.0);
  CHECK(mean_power({1.0, -1.0, 1.0, -1.0}) == doctest::Approx(1.0));
  CHECK(mean_power({3.0, 4.0}) == doctest::Approx(12.5));
}
