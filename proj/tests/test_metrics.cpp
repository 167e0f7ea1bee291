#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "reverbkit/metrics.hpp"
#include "reverbkit/rng.hpp"
#include "reverbkit/signal_ops.hpp"

using namespace reverbkit;

namespace {

Waveform tone(double freq, double seconds, double rate, double amp = 0.4) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < w.size(); ++i)
    w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return w;
}

Waveform white(double seconds, double rate, uint64_t seed) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(seconds * rate));
  Rng rng(seed);
  for (auto& s : w.samples) s = 0.3 * rng.uniform(-1.0, 1.0);
  return w;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("mfcc of silence matches the dct closed form") {
  // Constant log-mel kappa in every band: the orthonormal DCT-II leaves
  // c0 = kappa * sqrt(M) and zeros everywhere else.
  Waveform w;
  w.sample_rate = 24000.0;
  w.samples.assign(6000, 0.0);
  const Matrix c = mfcc(w);
  REQUIRE(c.cols == 13);
  REQUIRE(c.rows >= 1);
  const double kappa = std::log(kDefaultMelFloor);
  const double expect_c0 = kappa * std::sqrt(128.0);
  for (std::size_t t = 0; t < c.rows; ++t) {
    CHECK(c.at(t, 0) == doctest::Approx(expect_c0).epsilon(1e-9));
    for (std::size_t d = 1; d < c.cols; ++d) CHECK(std::abs(c.at(t, d)) < 1e-9);
  }
}

TEST_CASE("mcd of a signal with itself is exactly zero") {
  const Waveform w = white(0.8, 24000.0, 3);
  CHECK(mcd(w, w) == 0.0);
}

TEST_CASE("mcd ignores uniform gain because c0 is excluded") {
  const Waveform a = white(0.8, 24000.0, 5);
  Waveform b = a;
  for (auto& s : b.samples) s *= 2.0;
  CHECK(mcd(a, b) < 1e-9);
}

TEST_CASE("mcd is symmetric and positive for different signals") {
  const Waveform a = white(0.6, 24000.0, 7);
  const Waveform b = tone(440.0, 0.6, 24000.0);
  const double ab = mcd(a, b);
  CHECK(ab > 1.0);
  CHECK(ab == doctest::Approx(mcd(b, a)).epsilon(1e-12));
}

TEST_CASE("mcd from cepstra matches the closed form for a known offset") {
  Rng rng(21);
  Matrix ref(5, 13);
  for (auto& v : ref.data) v = rng.uniform(-4.0, 4.0);
  const std::vector<double> delta = {9.9, 0.3, -0.2, 0.5, 0.0,  0.1, -0.4,
                                     0.2, 0.6, -0.1, 0.05, 0.15, -0.25};
  Matrix hyp = ref;
  for (std::size_t t = 0; t < hyp.rows; ++t)
    for (std::size_t d = 0; d < hyp.cols; ++d) hyp.at(t, d) += delta[d];

  double acc = 0.0;
  for (std::size_t d = 1; d < delta.size(); ++d) acc += delta[d] * delta[d];
  const double expect = 10.0 / std::log(10.0) * std::sqrt(2.0 * acc);
  CHECK(mcd_from_cepstra(ref, hyp) == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(mcd_from_cepstra(ref, Matrix(5, 12)), std::invalid_argument);
}

TEST_CASE("mcd checks comparability") {
  const Waveform a = white(0.5, 24000.0, 9);
  const Waveform b = white(0.5, 16000.0, 9);
  CHECK_THROWS_AS(mcd(a, b), std::invalid_argument);

  const Waveform much_longer = white(0.7, 24000.0, 11);
  CHECK_THROWS_AS(mcd(a, much_longer), std::invalid_argument);

  // 8% longer: allowed, compared over the shorter frame count.
  const Waveform slightly_longer = white(0.54, 24000.0, 13);
  CHECK_NOTHROW(mcd(a, slightly_longer));
}

TEST_CASE("pitch tracking locks onto pure tones") {
  for (double f0 : {120.0, 220.0, 400.0}) {
    const Waveform w = tone(f0, 1.0, 24000.0);
    const PitchTrack pt = pitch_track(w);
    REQUIRE(!pt.f0_hz.empty());

    std::vector<double> voiced_f0;
    for (std::size_t i = 0; i < pt.f0_hz.size(); ++i)
      if (pt.voiced[i]) voiced_f0.push_back(pt.f0_hz[i]);
    REQUIRE(voiced_f0.size() > 0.9 * pt.f0_hz.size());
    CHECK(median(voiced_f0) == doctest::Approx(f0).epsilon(0.005));
  }
}

TEST_CASE("noise and silence are unvoiced") {
  const Waveform n = white(1.0, 24000.0, 15);
  const PitchTrack pn = pitch_track(n);
  std::size_t voiced = 0;
  for (auto v : pn.voiced) voiced += v;
  CHECK(voiced < pn.voiced.size() / 3);

  Waveform silent;
  silent.sample_rate = 24000.0;
  silent.samples.assign(24000, 0.0);
  const PitchTrack ps = pitch_track(silent);
  for (auto v : ps.voiced) CHECK(v == 0);
}

TEST_CASE("gpe of identical tracks is exactly zero") {
  const Waveform w = tone(180.0, 1.0, 24000.0);
  const GpeResult g = gpe(w, w);
  CHECK(g.value == 0.0);
  CHECK(g.joint_voiced_frames > 0);
  CHECK_FALSE(g.no_joint_voiced);
}

TEST_CASE("gpe flags a 30 percent shift and passes a 10 percent one") {
  const Waveform ref = tone(200.0, 1.0, 24000.0);
  const Waveform off30 = tone(260.0, 1.0, 24000.0);
  const Waveform off10 = tone(220.0, 1.0, 24000.0);

  const GpeResult bad = gpe(ref, off30);
  CHECK(bad.value == 1.0);
  CHECK(bad.joint_voiced_frames > 0);

  const GpeResult ok = gpe(ref, off10);
  CHECK(ok.value == 0.0);

  // A looser threshold forgives the 30 percent shift.
  CHECK(gpe(ref, off30, 0.5).value == 0.0);
}

TEST_CASE("gpe reports vacuous comparisons instead of inventing a value") {
  const Waveform ref = tone(200.0, 1.0, 24000.0);
  Waveform silent;
  silent.sample_rate = 24000.0;
  silent.samples.assign(24000, 0.0);
  const GpeResult g = gpe(ref, silent);
  CHECK(g.value == 0.0);
  CHECK(g.joint_voiced_frames == 0);
  CHECK(g.no_joint_voiced);
}

TEST_CASE("gpe validates comparability like mcd") {
  const Waveform a = tone(200.0, 0.5, 24000.0);
  const Waveform b = tone(200.0, 0.5, 16000.0);
  CHECK_THROWS_AS(gpe(a, b), std::invalid_argument);
}
