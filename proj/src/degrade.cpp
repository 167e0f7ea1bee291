#include "reverbkit/degrade.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include "reverbkit/signal_ops.hpp"
#include "reverbkit/wav_io.hpp"

namespace reverbkit {

namespace {

std::int16_t to_pcm16(double x) {
  const double scaled = std::round(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

double from_pcm16(std::int16_t v) { return v / 32768.0; }

int segment_index(int value, const std::array<int, 8>& ends) {
  for (int i = 0; i < 8; ++i) {
    if (value <= ends[i]) return i;
  }
  return 8;
}

// Order-24 Butterworth lowpass as 12 cascaded RBJ biquads; run forward and
// backward for zero phase, giving ~49 dB attenuation at 1.125x the cutoff.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

std::vector<Biquad> butterworth_sections(double cutoff_hz, double fs) {
  constexpr int kOrder = 24;
  const double w0 = 2.0 * 3.14159265358979323846 * cutoff_hz / fs;
  const double cw = std::cos(w0), sw = std::sin(w0);
  std::vector<Biquad> sections;
  for (int k = 1; k <= kOrder / 2; ++k) {
    const double q = 1.0 / (2.0 * std::cos((2.0 * k - 1.0) * 3.14159265358979323846 /
                                           (2.0 * kOrder)));
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = s.b0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    sections.push_back(s);
  }
  return sections;
}

void filter_in_place(std::vector<double>& x, const std::vector<Biquad>& sections) {
  for (const Biquad& s : sections) {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& v : x) {
      const double y = s.b0 * v + s.b1 * x1 + s.b2 * x2 - s.a1 * y1 - s.a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
}

Waveform lowpass_zero_phase(const Waveform& w, double cutoff_hz) {
  if (!(cutoff_hz > 0.0) || cutoff_hz >= w.sample_rate / 2.0) {
    throw std::invalid_argument("apply_artifact: lowpass cutoff must be in (0, Nyquist)");
  }
  const std::vector<Biquad> sections = butterworth_sections(cutoff_hz, w.sample_rate);
  Waveform out = w;
  filter_in_place(out.samples, sections);
  std::reverse(out.samples.begin(), out.samples.end());
  filter_in_place(out.samples, sections);
  std::reverse(out.samples.begin(), out.samples.end());
  return out;
}

Waveform run_external_codec(const Waveform& w, const std::string& command_template) {
  namespace fs = std::filesystem;
  static std::atomic<unsigned> counter{0};
  const unsigned id = counter.fetch_add(1);
  const fs::path dir = fs::temp_directory_path();
  const fs::path in_path = dir / ("reverbkit_codec_in_" + std::to_string(id) + ".wav");
  const fs::path out_path = dir / ("reverbkit_codec_out_" + std::to_string(id) + ".wav");

  std::string cmd = command_template;
  auto replace_all = [&cmd](const std::string& key, const std::string& value) {
    for (std::size_t pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos)) {
      cmd.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  if (cmd.find("{input}") == std::string::npos || cmd.find("{output}") == std::string::npos) {
    throw std::invalid_argument(
        "apply_artifact: external codec command must contain {input} and {output}");
  }
  replace_all("{input}", in_path.string());
  replace_all("{output}", out_path.string());

  write_wav(in_path.string(), w, WavEncoding::Pcm16);
  const int status = std::system(cmd.c_str());
  Waveform result;
  std::string failure;
  if (status != 0) {
    failure = "external codec exited with status " + std::to_string(status);
  } else {
    try {
      result = read_wav(out_path.string());
    } catch (const std::exception& e) {
      failure = std::string("external codec produced unreadable output: ") + e.what();
    }
  }
  std::error_code ec;
  fs::remove(in_path, ec);
  fs::remove(out_path, ec);
  if (!failure.empty()) {
    throw std::runtime_error("apply_artifact: " + failure);
  }
  if (result.sample_rate != w.sample_rate) {
    throw std::runtime_error("apply_artifact: external codec changed the sample rate");
  }
  return result;
}

}  // namespace

std::uint8_t alaw_encode(std::int16_t pcm) {
  static const std::array<int, 8> seg_end = {0x1F, 0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF};
  int value = pcm >> 3;  // 13-bit magnitude domain
  int mask;
  if (value >= 0) {
    mask = 0xD5;
  } else {
    mask = 0x55;
    value = -value - 1;
  }
  const int seg = segment_index(value, seg_end);
  if (seg >= 8) return static_cast<std::uint8_t>(0x7F ^ mask);
  int aval = seg << 4;
  aval |= (seg < 2 ? value >> 1 : value >> seg) & 0x0F;
  return static_cast<std::uint8_t>(aval ^ mask);
}

std::int16_t alaw_decode(std::uint8_t alaw) {
  alaw ^= 0x55;
  int t = (alaw & 0x0F) << 4;
  const int seg = (alaw & 0x70) >> 4;
  switch (seg) {
    case 0: t += 8; break;
    case 1: t += 0x108; break;
    default:
      t += 0x108;
      t <<= seg - 1;
  }
  return static_cast<std::int16_t>((alaw & 0x80) ? t : -t);
}

std::uint8_t mulaw_encode(std::int16_t pcm) {
  static const std::array<int, 8> seg_end = {0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF, 0x1FFF};
  constexpr int kBias = 0x84;
  constexpr int kClip = 8159;
  int value = pcm >> 2;  // 14-bit magnitude domain
  int mask;
  if (value < 0) {
    value = -value;
    mask = 0x7F;
  } else {
    mask = 0xFF;
  }
  value = std::min(value, kClip) + (kBias >> 2);
  const int seg = segment_index(value, seg_end);
  if (seg >= 8) return static_cast<std::uint8_t>(0x7F ^ mask);
  const int uval = (seg << 4) | ((value >> (seg + 1)) & 0x0F);
  return static_cast<std::uint8_t>(uval ^ mask);
}

std::int16_t mulaw_decode(std::uint8_t ulaw) {
  constexpr int kBias = 0x84;
  ulaw = static_cast<std::uint8_t>(~ulaw);
  int t = ((ulaw & 0x0F) << 3) + kBias;
  t <<= (ulaw & 0x70) >> 4;
  return static_cast<std::int16_t>((ulaw & 0x80) ? kBias - t : t - kBias);
}

std::vector<Artifact> parse_artifact_chain(const std::string& spec) {
  std::vector<Artifact> chain;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string::npos) comma = spec.size();
    const std::string item = spec.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const std::size_t colon = item.find(':');
    const std::string name = item.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : item.substr(colon + 1);
    if (name == "alaw") {
      chain.push_back(Artifact::alaw());
    } else if (name == "mulaw") {
      chain.push_back(Artifact::mulaw());
    } else if (name == "lowpass") {
      if (arg.empty()) throw std::invalid_argument("parse_artifact_chain: lowpass needs a cutoff");
      chain.push_back(Artifact::lowpass(std::stod(arg)));
    } else if (name == "bitcrush") {
      if (arg.empty()) throw std::invalid_argument("parse_artifact_chain: bitcrush needs a bit depth");
      chain.push_back(Artifact::bitcrush(std::stoi(arg)));
    } else if (name == "external") {
      if (arg.empty()) throw std::invalid_argument("parse_artifact_chain: external needs a command");
      chain.push_back(Artifact::external(arg));
    } else {
      throw std::invalid_argument("parse_artifact_chain: unknown artifact '" + name + "'");
    }
  }
  return chain;
}

std::string artifact_to_string(const Artifact& a) {
  switch (a.type) {
    case ArtifactType::ALaw: return "alaw";
    case ArtifactType::MuLaw: return "mulaw";
    case ArtifactType::LowPass: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "lowpass:%g", a.cutoff_hz);
      return buf;
    }
    case ArtifactType::BitCrush: return "bitcrush:" + std::to_string(a.bits);
    case ArtifactType::ExternalCodec: return "external:" + a.command;
  }
  return "";
}

Waveform apply_artifact(const Waveform& w, const Artifact& a) {
  require_valid(w, "apply_artifact");
  switch (a.type) {
    case ArtifactType::ALaw: {
      Waveform out = w;
      for (double& v : out.samples) v = from_pcm16(alaw_decode(alaw_encode(to_pcm16(v))));
      return out;
    }
    case ArtifactType::MuLaw: {
      Waveform out = w;
      for (double& v : out.samples) v = from_pcm16(mulaw_decode(mulaw_encode(to_pcm16(v))));
      return out;
    }
    case ArtifactType::LowPass:
      return lowpass_zero_phase(w, a.cutoff_hz);
    case ArtifactType::BitCrush: {
      if (a.bits < 2 || a.bits > 16) {
        throw std::invalid_argument("apply_artifact: bitcrush depth must be in [2, 16]");
      }
      const double levels = std::ldexp(1.0, a.bits - 1);  // 2^(bits-1)
      Waveform out = w;
      for (double& v : out.samples) v = std::round(v * levels) / levels;
      return out;
    }
    case ArtifactType::ExternalCodec:
      return run_external_codec(w, a.command);
  }
  throw std::invalid_argument("apply_artifact: unknown artifact type");
}

Waveform degrade(const Waveform& s, const RIR& r, const Waveform& n, double snr_db,
                 const std::vector<Artifact>& chain, Rng& rng, std::size_t* clipped) {
  Waveform wet = convolve(s, r.taps);
  const std::size_t target_len = wet.size();

  Waveform mixed;
  if (std::isinf(snr_db) && snr_db > 0) {
    mixed = std::move(wet);
  } else {
    if (n.empty()) throw std::invalid_argument("degrade: noise signal is empty");
    const std::size_t offset = rng.next_below(n.size());
    mixed = mix_at_snr(wet, n, snr_db, offset);
  }

  for (const Artifact& a : chain) mixed = apply_artifact(mixed, a);

  mixed.samples.resize(target_len, 0.0);
  std::size_t clip_count = 0;
  for (double& v : mixed.samples) {
    if (v > 1.0 || v < -1.0) {
      v = std::clamp(v, -1.0, 1.0);
      ++clip_count;
    }
  }
  if (clipped) *clipped = clip_count;
  return mixed;
}

TrainingExample make_training_example(const Waveform& s, const RIR& r, const Waveform& n,
                                      double snr_db, const std::vector<Artifact>& chain,
                                      double q, Rng& rng) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("make_training_example: q must be in [0, 1]");
  }
  TrainingExample ex;
  ex.reverb_active = rng.uniform01() > q;
  ex.input = degrade(s, r, n, snr_db, chain, rng);
  if (ex.reverb_active) {
    ex.target = convolve(s, r.taps);
  } else {
    ex.target = s;
    ex.target.samples.resize(ex.input.size(), 0.0);
  }
  return ex;
}

}  // namespace reverbkit
