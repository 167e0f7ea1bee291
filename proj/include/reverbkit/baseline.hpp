#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "reverbkit/common.hpp"
#include "reverbkit/rir_sim.hpp"
#include "reverbkit/rng.hpp"

namespace reverbkit {

// Uniform prior over candidate rooms for the two-stage re-reverberation
// baseline. max_order < 0 means the adaptive order for the room's absorption.
struct RoomPrior {
  std::array<double, 2> lx{3.0, 10.0};
  std::array<double, 2> ly{3.0, 10.0};
  std::array<double, 2> lz{2.4, 4.0};
  double min_wall_dist = 0.5;
  double sample_rate = 24000.0;
  int max_order = -1;
};

struct MatchedReverbResult {
  Waveform rendered;
  RIR chosen;
  std::size_t chosen_index = 0;
  std::vector<double> candidate_drrs;  // one per candidate; NaN where simulation failed
};

// Draws a room from the prior, sets its absorption to hit rt60_target via the
// Sabine relation, places source and microphone at random, and simulates.
RIR sample_candidate_rir(const RoomPrior& prior, double rt60_target, Rng& rng);

// Index of the candidate DRR closest to the target; ties break to the
// earliest index and NaN entries (failed candidates) are skipped. Throws when
// no candidate is usable.
std::size_t select_closest_drr(const std::vector<double>& candidate_drrs, double target_drr);

// Two-stage baseline: simulate n_candidates RIRs targeting rt60_gt, keep the
// one whose DRR is closest to drr_gt (earliest index on ties), and convolve
// the dry signal with it. Throws if every candidate simulation fails.
MatchedReverbResult apply_matched_reverb(const Waveform& dry, double rt60_gt, double drr_gt,
                                         std::size_t n_candidates, const RoomPrior& prior,
                                         Rng& rng);

// Ground-truth (RT60, DRR) pair measured from a reference RIR.
std::pair<double, double> rt60_drr_from_reference(const Waveform& reference_rir);

}  // namespace reverbkit
