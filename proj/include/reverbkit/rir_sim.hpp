// rir_sim.hpp -- image-source simulation of rectangular-room impulse responses.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "reverbkit/common.hpp"
#include "reverbkit/rng.hpp"

namespace reverbkit {

struct Point3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

double distance(const Point3& a, const Point3& b);

/// Rectangular room with uniform wall absorption. max_order < 0 selects the
/// adaptive default (deep enough that image attenuation falls 60 dB below
/// the direct path); any request is clamped to kMaxOrderGuard.
struct RoomSpec {
  std::array<double, 3> dims{5.0, 4.0, 3.0};  // meters
  double absorption = 0.3;                    // alpha in (0, 1], all six walls
  int max_order = -1;
  double speed_of_sound = 343.0;
  double sample_rate = 24000.0;
};

struct RirMeta {
  std::array<double, 3> dims{};
  Point3 src, mic;
  double alpha = 0.0;
  int max_order = 0;
  uint64_t seed = 0;
  double sample_rate = 0.0;
};

struct RIR {
  Waveform taps;
  std::optional<RirMeta> meta;
};

inline constexpr int kMaxOrderGuard = 60;
// Fractional delays are rendered with an 81-tap Hann-windowed sinc kernel.
inline constexpr int kSincHalfWidth = 40;

/// Reflection order at which uniform-absorption image amplitude drops 60 dB
/// below the direct path, clamped to [1, kMaxOrderGuard].
int adaptive_max_order(double absorption);

/// One image source's contribution: amplitude beta^order / (4*pi*d) arriving
/// delay_samples = d / c * sample_rate after the emission.
struct ImageArrival {
  double amplitude = 0.0;
  double delay_samples = 0.0;
  int order = 0;
};

/// The full image list up to the room's reflection order (unsorted).
/// Source and mic must be strictly inside the room and apart.
std::vector<ImageArrival> enumerate_images(const RoomSpec& room, const Point3& src,
                                           const Point3& mic);

/// Image-source RIR: renders every arrival from enumerate_images with the
/// 81-tap Hann-windowed sinc kernel.
RIR simulate_rir(const RoomSpec& room, const Point3& src, const Point3& mic);

/// Sabine inversion: alpha = 0.161 V / (S * rt60), clamped to (0.01, 0.99].
/// If `clamped` is non-null it reports whether clamping occurred.
double absorption_for_rt60(const std::array<double, 3>& dims, double rt60_target,
                           bool* clamped = nullptr);

/// Uniform source/mic placement at least min_wall_dist from every wall with
/// the source-mic distance >= 0.3 m enforced by rejection (1000 attempts).
std::pair<Point3, Point3> random_placement(const RoomSpec& room, Rng& rng,
                                           double min_wall_dist);

inline constexpr double kMinSrcMicDistance = 0.3;

}  // namespace reverbkit
