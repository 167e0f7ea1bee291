// wav_io.hpp -- RIFF WAV reader/writer for mono PCM 16-bit and IEEE float32.
#pragma once

#include <string>

#include "reverbkit/common.hpp"

namespace reverbkit {

enum class WavEncoding { Pcm16, Float32 };

/// Reads a mono WAV file. Accepts PCM 16-bit (format 1) and IEEE float32
/// (format 3); anything else, including multi-channel files, is rejected
/// with std::runtime_error.
Waveform read_wav(const std::string& path);

/// Writes a mono WAV file. Samples are clamped to [-1, 1] for PCM output;
/// the float32 encoding stores samples as-is (narrowed to float).
void write_wav(const std::string& path, const Waveform& w,
               WavEncoding encoding = WavEncoding::Float32);

}  // namespace reverbkit
