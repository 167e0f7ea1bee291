#include "reverbkit/baseline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "reverbkit/rir_analysis.hpp"
#include "reverbkit/signal_ops.hpp"

namespace reverbkit {

RIR sample_candidate_rir(const RoomPrior& prior, double rt60_target, Rng& rng) {
  RoomSpec room;
  room.dims = {rng.uniform(prior.lx[0], prior.lx[1]), rng.uniform(prior.ly[0], prior.ly[1]),
               rng.uniform(prior.lz[0], prior.lz[1])};
  room.absorption = absorption_for_rt60(room.dims, rt60_target);
  room.max_order = prior.max_order;
  room.sample_rate = prior.sample_rate;
  const auto [src, mic] = random_placement(room, rng, prior.min_wall_dist);
  return simulate_rir(room, src, mic);
}

std::size_t select_closest_drr(const std::vector<double>& candidate_drrs, double target_drr) {
  std::size_t best = candidate_drrs.size();
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidate_drrs.size(); ++i) {
    if (std::isnan(candidate_drrs[i])) continue;
    const double err = std::abs(candidate_drrs[i] - target_drr);
    if (best == candidate_drrs.size() || err < best_err) {
      best = i;
      best_err = err;
    }
  }
  if (best == candidate_drrs.size()) {
    throw std::runtime_error("select_closest_drr: no usable candidate");
  }
  return best;
}

MatchedReverbResult apply_matched_reverb(const Waveform& dry, double rt60_gt, double drr_gt,
                                         std::size_t n_candidates, const RoomPrior& prior,
                                         Rng& rng) {
  if (!(rt60_gt > 0.0)) {
    throw std::invalid_argument("apply_matched_reverb: rt60 target must be > 0");
  }
  if (n_candidates < 1) {
    throw std::invalid_argument("apply_matched_reverb: need at least one candidate");
  }

  MatchedReverbResult result;
  result.candidate_drrs.reserve(n_candidates);
  std::vector<RIR> candidates(n_candidates);
  for (std::size_t i = 0; i < n_candidates; ++i) {
    double candidate_drr = std::numeric_limits<double>::quiet_NaN();
    try {
      candidates[i] = sample_candidate_rir(prior, rt60_gt, rng);
      candidate_drr = drr(candidates[i].taps);
    } catch (const std::exception&) {
    }
    result.candidate_drrs.push_back(candidate_drr);
  }
  try {
    result.chosen_index = select_closest_drr(result.candidate_drrs, drr_gt);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("apply_matched_reverb: every candidate simulation failed");
  }
  result.chosen = std::move(candidates[result.chosen_index]);
  result.rendered = convolve(dry, result.chosen.taps);
  return result;
}

std::pair<double, double> rt60_drr_from_reference(const Waveform& reference_rir) {
  return {rt60(reference_rir), drr(reference_rir)};
}

}  // namespace reverbkit
