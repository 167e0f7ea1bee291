#pragma once

#include <cstddef>
#include <vector>

#include "reverbkit/common.hpp"

namespace reverbkit {

// Floor applied to the normalized energy-decay curve where the tail energy
// underflows to zero.
inline constexpr double kEdcFloorDb = -120.0;

// Pre-roll ahead of the direct-path peak included in the direct-energy window;
// windowed-sinc rendering spreads a little energy before the geometric arrival.
inline constexpr double kDrrPreRollSeconds = 0.0005;

// Schroeder backward integration: EDC[k] = 10*log10(sum_{i>=k} r[i]^2 / total).
// Monotonically non-increasing, EDC[0] == 0 dB. Throws on an all-zero RIR.
std::vector<double> energy_decay_curve(const Waveform& rir);

// Reverberation time from a least-squares line fit to the EDC over the
// [-5, -25] dB span, extrapolated to 60 dB (T20 * 3). Throws if the curve
// never reaches -25 dB.
double rt60(const Waveform& rir);

// Index of max |r[i]|; ties break to the earliest sample. Throws on all-zero.
std::size_t direct_path_index(const Waveform& rir);

// Direct-to-reverberant ratio in dB: energy in
// [t_d - 0.5 ms, t_d + direct_window] over everything later. Returns +inf
// when there is no late energy.
double drr(const Waveform& rir, double direct_window_s = 0.008);

}  // namespace reverbkit
