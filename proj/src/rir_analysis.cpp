#include "reverbkit/rir_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reverbkit {

std::vector<double> energy_decay_curve(const Waveform& rir) {
  require_valid(rir, "energy_decay_curve");
  const std::size_t n = rir.size();
  std::vector<double> edc(n);
  double tail = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    tail += rir.samples[i] * rir.samples[i];
    edc[i] = tail;
  }
  const double total = n ? edc[0] : 0.0;
  if (total <= 0.0) {
    throw std::invalid_argument("energy_decay_curve: RIR has zero energy");
  }
  for (double& v : edc) {
    v = v > 0.0 ? std::max(kEdcFloorDb, 10.0 * std::log10(v / total)) : kEdcFloorDb;
  }
  return edc;
}

double rt60(const Waveform& rir) {
  const std::vector<double> edc = energy_decay_curve(rir);
  std::size_t k_hi = edc.size(), k_lo = edc.size();
  for (std::size_t k = 0; k < edc.size(); ++k) {
    if (k_hi == edc.size() && edc[k] <= -5.0) k_hi = k;
    if (edc[k] <= -25.0) {
      k_lo = k;
      break;
    }
  }
  if (k_lo == edc.size() || k_lo <= k_hi) {
    throw std::runtime_error("rt60: decay range insufficient (EDC never spans -5..-25 dB)");
  }

  // Least-squares line through (k, edc[k]) for k in [k_hi, k_lo].
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(k_lo - k_hi + 1);
  for (std::size_t k = k_hi; k <= k_lo; ++k) {
    const double x = static_cast<double>(k);
    sx += x;
    sy += edc[k];
    sxx += x * x;
    sxy += x * edc[k];
  }
  const double denom = count * sxx - sx * sx;
  const double slope = denom != 0.0 ? (count * sxy - sx * sy) / denom : 0.0;
  if (!(slope < 0.0)) {
    throw std::runtime_error("rt60: non-decaying fit region");
  }
  const double samples_per_60db = 60.0 / -slope;
  return samples_per_60db / rir.sample_rate;
}

std::size_t direct_path_index(const Waveform& rir) {
  require_valid(rir, "direct_path_index");
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < rir.size(); ++i) {
    const double a = std::abs(rir.samples[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs <= 0.0) {
    throw std::invalid_argument("direct_path_index: RIR has zero energy");
  }
  return best;
}

double drr(const Waveform& rir, double direct_window_s) {
  if (!(direct_window_s > 0.0)) {
    throw std::invalid_argument("drr: direct window must be > 0");
  }
  const std::size_t t_d = direct_path_index(rir);
  const std::size_t n = rir.size();
  const auto pre = static_cast<std::size_t>(std::llround(kDrrPreRollSeconds * rir.sample_rate));
  const auto post = static_cast<std::size_t>(std::llround(direct_window_s * rir.sample_rate));
  const std::size_t lo = t_d > pre ? t_d - pre : 0;
  const std::size_t hi = std::min(n - 1, t_d + post);

  double direct = 0.0, late = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) direct += rir.samples[i] * rir.samples[i];
  for (std::size_t i = hi + 1; i < n; ++i) late += rir.samples[i] * rir.samples[i];
  return db_from_power_ratio(direct, late);
}

}  // namespace reverbkit
