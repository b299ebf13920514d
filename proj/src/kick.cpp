#include "rydion/kick.hpp"

#include <cmath>

#include "rydion/constants.hpp"
#include "rydion/errors.hpp"

namespace rydion {

double kick_to_alpha(const KickModel& kick) {
  if (!(kick.kappa > 0.0) || !(kick.cycles >= 1.0) || !(kick.drive_freq > 0.0))
    throw ConfigError("kick model needs kappa > 0, cycles >= 1 and a positive drive frequency");
  const double t = kick.cycles * two_pi / kick.drive_freq;
  const double half_phase = 0.5 * (kick.drive_freq - kick.mode_freq) * t;
  const double sinc = half_phase == 0.0 ? 1.0 : std::sin(half_phase) / half_phase;
  return kick.kappa * kick.v_amp * t * std::abs(sinc);
}

}  // namespace rydion
