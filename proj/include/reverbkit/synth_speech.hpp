#pragma once

#include "reverbkit/common.hpp"
#include "reverbkit/rng.hpp"

namespace reverbkit {

// Self-contained pseudo-speech: a harmonic source with a slowly drifting f0,
// two formant resonances, a syllabic amplitude envelope, and a little shaped
// noise. Good enough to exercise pitch tracking, mel features, and training
// without a licensed corpus. Deterministic given the rng state.
Waveform synth_utterance(double duration_s, double sample_rate, Rng& rng);

// Broadband background noise (white plus low-passed white), unit-free RMS of
// about 0.1.
Waveform synth_noise(double duration_s, double sample_rate, Rng& rng);

}  // namespace reverbkit
