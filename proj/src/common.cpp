#include "reverbkit/common.hpp"

#include <cmath>

namespace reverbkit {

void require_valid(const Waveform& w, const char* who) {
  if (!(w.sample_rate > 0.0)) {
    throw std::invalid_argument(std::string(who) + ": sample_rate must be > 0");
  }
  for (double s : w.samples) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument(std::string(who) + ": waveform contains non-finite samples");
    }
  }
}

double mean_power(const std::vector<double>& samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return acc / static_cast<double>(samples.size());
}

}  // namespace reverbkit
