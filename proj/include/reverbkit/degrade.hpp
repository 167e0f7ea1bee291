#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reverbkit/common.hpp"
#include "reverbkit/rir_sim.hpp"
#include "reverbkit/rng.hpp"

namespace reverbkit {

enum class ArtifactType { ALaw, MuLaw, LowPass, BitCrush, ExternalCodec };

// One step of the degradation chain. Only the fields relevant to `type` are
// meaningful: cutoff_hz for LowPass, bits for BitCrush, command for
// ExternalCodec (a shell template containing {input} and {output}).
struct Artifact {
  ArtifactType type = ArtifactType::ALaw;
  double cutoff_hz = 0.0;
  int bits = 0;
  std::string command;

  static Artifact alaw() { return {ArtifactType::ALaw, 0.0, 0, {}}; }
  static Artifact mulaw() { return {ArtifactType::MuLaw, 0.0, 0, {}}; }
  static Artifact lowpass(double cutoff_hz) { return {ArtifactType::LowPass, cutoff_hz, 0, {}}; }
  static Artifact bitcrush(int bits) { return {ArtifactType::BitCrush, 0.0, bits, {}}; }
  static Artifact external(std::string command) {
    return {ArtifactType::ExternalCodec, 0.0, 0, std::move(command)};
  }
};

// Parses a comma-separated chain spec, e.g. "alaw,lowpass:4000,bitcrush:8".
// External codecs use "external:<command template>" (the template may not
// contain commas). Empty string -> empty chain.
std::vector<Artifact> parse_artifact_chain(const std::string& spec);
std::string artifact_to_string(const Artifact& a);

// G.711 companding on 16-bit linear PCM.
std::uint8_t alaw_encode(std::int16_t pcm);
std::int16_t alaw_decode(std::uint8_t alaw);
std::uint8_t mulaw_encode(std::int16_t pcm);
std::int16_t mulaw_decode(std::uint8_t ulaw);

// Applies one artifact. Companding rounds through int16; LowPass is a
// zero-phase order-24 Butterworth (12 biquads run forward then backward);
// BitCrush quantizes uniformly to 2^bits levels over [-1, 1]; ExternalCodec
// shells out and requires the tool to preserve the sample rate.
Waveform apply_artifact(const Waveform& w, const Artifact& a);

// x = A(s * r + n): convolve, mix at the requested SNR (noise start offset is
// drawn from rng unless snr_db is +inf), apply the chain in order, truncate to
// len(s * r), clamp to [-1, 1]. The number of clamped samples is written to
// *clipped when provided.
Waveform degrade(const Waveform& s, const RIR& r, const Waveform& n, double snr_db,
                 const std::vector<Artifact>& chain, Rng& rng,
                 std::size_t* clipped = nullptr);

// Supervised pair with the stochastic target switch: the input is always the
// degraded signal; with probability 1-q the target is the reverberant signal
// s * r, otherwise the clean s (zero-padded to the input length).
struct TrainingExample {
  Waveform input;
  Waveform target;
  bool reverb_active = true;
};

TrainingExample make_training_example(const Waveform& s, const RIR& r, const Waveform& n,
                                      double snr_db, const std::vector<Artifact>& chain,
                                      double q, Rng& rng);

}  // namespace reverbkit
