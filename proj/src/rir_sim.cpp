#include "reverbkit/rir_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace reverbkit {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

void require_inside(const RoomSpec& room, const Point3& p, const char* what) {
  const bool inside = p.x > 0.0 && p.x < room.dims[0] && p.y > 0.0 && p.y < room.dims[1] &&
                      p.z > 0.0 && p.z < room.dims[2];
  if (!inside) {
    throw std::invalid_argument(std::string("simulate_rir: ") + what +
                                " must lie strictly inside the room");
  }
}

}  // namespace

double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

int adaptive_max_order(double absorption) {
  const double beta = std::sqrt(1.0 - absorption);
  if (beta <= 0.0) return 1;
  // beta^K = 1e-3 (60 dB below the direct-path amplitude).
  const int k = static_cast<int>(std::ceil(std::log(1e-3) / std::log(beta)));
  return std::clamp(k, 1, kMaxOrderGuard);
}

std::vector<ImageArrival> enumerate_images(const RoomSpec& room, const Point3& src,
                                           const Point3& mic) {
  if (!(room.dims[0] > 0 && room.dims[1] > 0 && room.dims[2] > 0)) {
    throw std::invalid_argument("simulate_rir: room dimensions must be > 0");
  }
  if (!(room.absorption > 0.0 && room.absorption <= 1.0)) {
    throw std::invalid_argument("simulate_rir: absorption must be in (0, 1]");
  }
  if (!(room.sample_rate > 0.0) || !(room.speed_of_sound > 0.0)) {
    throw std::invalid_argument("simulate_rir: sample_rate and speed_of_sound must be > 0");
  }
  require_inside(room, src, "source");
  require_inside(room, mic, "microphone");
  if (distance(src, mic) < 1e-9) {
    throw std::invalid_argument("simulate_rir: source and microphone coincide (zero distance)");
  }

  const double beta = std::sqrt(1.0 - room.absorption);
  const int order_cap = room.max_order >= 0 ? std::min(room.max_order, kMaxOrderGuard)
                                            : adaptive_max_order(room.absorption);
  const double samples_per_meter = room.sample_rate / room.speed_of_sound;

  // Image positions: (1-2p)*src + 2n*L per axis with p in {0,1}, n integer,
  // reflecting |n - p| + |n| times against that axis's wall pair.
  const int nmax = (order_cap + 2) / 2;
  std::vector<ImageArrival> arrivals;
  arrivals.reserve(1024);

  const double sx[2] = {src.x, -src.x};
  const double sy[2] = {src.y, -src.y};
  const double sz[2] = {src.z, -src.z};

  for (int nx = -nmax; nx <= nmax; ++nx) {
    for (int px = 0; px < 2; ++px) {
      const int ox = std::abs(nx - px) + std::abs(nx);
      if (ox > order_cap) continue;
      const double ix = sx[px] + 2.0 * nx * room.dims[0] - mic.x;
      for (int ny = -nmax; ny <= nmax; ++ny) {
        for (int py = 0; py < 2; ++py) {
          const int oy = ox + std::abs(ny - py) + std::abs(ny);
          if (oy > order_cap) continue;
          const double iy = sy[py] + 2.0 * ny * room.dims[1] - mic.y;
          for (int nz = -nmax; nz <= nmax; ++nz) {
            for (int pz = 0; pz < 2; ++pz) {
              const int order = oy + std::abs(nz - pz) + std::abs(nz);
              if (order > order_cap) continue;
              const double iz = sz[pz] + 2.0 * nz * room.dims[2] - mic.z;
              const double d = std::sqrt(ix * ix + iy * iy + iz * iz);
              if (d < 1e-9) continue;
              arrivals.push_back(
                  {std::pow(beta, order) / (4.0 * kPi * d), d * samples_per_meter, order});
            }
          }
        }
      }
    }
  }
  return arrivals;
}

RIR simulate_rir(const RoomSpec& room, const Point3& src, const Point3& mic) {
  const std::vector<ImageArrival> arrivals = enumerate_images(room, src, mic);
  double max_delay = 0.0;
  for (const ImageArrival& a : arrivals) max_delay = std::max(max_delay, a.delay_samples);

  const std::size_t length =
      static_cast<std::size_t>(std::ceil(max_delay)) + kSincHalfWidth + 1;
  std::vector<double> taps(length, 0.0);

  // Windowed-sinc rendering. sin(pi*(u0+k)) alternates sign with k, and the
  // Hann factor follows a rotation recurrence, so the inner loop is
  // multiply-add only.
  const double window_span = static_cast<double>(kSincHalfWidth + 1);
  const double delta = kPi / window_span;
  const double cos_delta = std::cos(delta), sin_delta = std::sin(delta);
  for (const ImageArrival& a : arrivals) {
    const int i0 = std::max(0, static_cast<int>(std::ceil(a.delay_samples - kSincHalfWidth)));
    const int i1 = std::min(static_cast<int>(length) - 1,
                            static_cast<int>(std::floor(a.delay_samples + kSincHalfWidth)));
    if (i0 > i1) continue;
    const double u0 = i0 - a.delay_samples;
    double sin_num = std::sin(kPi * u0);
    double cos_h = std::cos(delta * u0);
    double sin_h = std::sin(delta * u0);
    for (int i = i0; i <= i1; ++i) {
      const double u = i - a.delay_samples;
      const double sinc = std::abs(u) < 1e-9 ? 1.0 : sin_num / (kPi * u);
      const double hann = 0.5 * (1.0 + cos_h);
      taps[static_cast<std::size_t>(i)] += a.amplitude * hann * sinc;
      sin_num = -sin_num;
      const double c = cos_h * cos_delta - sin_h * sin_delta;
      sin_h = sin_h * cos_delta + cos_h * sin_delta;
      cos_h = c;
    }
  }

  RIR rir;
  rir.taps.samples = std::move(taps);
  rir.taps.sample_rate = room.sample_rate;
  RirMeta meta;
  meta.dims = room.dims;
  meta.src = src;
  meta.mic = mic;
  meta.alpha = room.absorption;
  meta.max_order = room.max_order >= 0 ? std::min(room.max_order, kMaxOrderGuard)
                                       : adaptive_max_order(room.absorption);
  meta.sample_rate = room.sample_rate;
  rir.meta = meta;
  return rir;
}

double absorption_for_rt60(const std::array<double, 3>& dims, double rt60_target,
                           bool* clamped) {
  if (!(rt60_target > 0.0)) {
    throw std::invalid_argument("absorption_for_rt60: rt60_target must be > 0");
  }
  if (!(dims[0] > 0 && dims[1] > 0 && dims[2] > 0)) {
    throw std::invalid_argument("absorption_for_rt60: room dimensions must be > 0");
  }
  const double volume = dims[0] * dims[1] * dims[2];
  const double surface =
      2.0 * (dims[0] * dims[1] + dims[0] * dims[2] + dims[1] * dims[2]);
  const double alpha = 0.161 * volume / (surface * rt60_target);
  const double clamped_alpha = std::clamp(alpha, 0.01, 0.99);
  if (clamped) *clamped = clamped_alpha != alpha;
  return clamped_alpha;
}

std::pair<Point3, Point3> random_placement(const RoomSpec& room, Rng& rng,
                                           double min_wall_dist) {
  const double min_dim = std::min({room.dims[0], room.dims[1], room.dims[2]});
  if (!(min_wall_dist >= 0.0) || min_wall_dist >= min_dim / 2.0) {
    throw std::invalid_argument(
        "random_placement: infeasible constraints (min_wall_dist must be < min(dims)/2)");
  }
  auto draw = [&](double lim) { return rng.uniform(min_wall_dist, lim - min_wall_dist); };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Point3 src{draw(room.dims[0]), draw(room.dims[1]), draw(room.dims[2])};
    Point3 mic{draw(room.dims[0]), draw(room.dims[1]), draw(room.dims[2])};
    if (distance(src, mic) >= kMinSrcMicDistance) return {src, mic};
  }
  throw std::runtime_error(
      "random_placement: infeasible constraints after 1000 rejection attempts");
}

}  // namespace reverbkit
