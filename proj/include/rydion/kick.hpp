#pragma once

namespace rydion {

// Resonant electric-kick calibration: a burst of `cycles` sine periods at
// drive_freq displaces the ion's motional state. kappa converts the pulse
// area V_amp * T into a coherent state size.
struct KickModel {
  double kappa = 0.0;       // |alpha| per V s
  double v_amp = 0.0;       // V
  double cycles = 1.0;
  double drive_freq = 0.0;  // rad/s
  double mode_freq = 0.0;   // rad/s, driven mode
};

// |alpha| = kappa * V * T * |sinc(delta T / 2)|, T = cycles * 2 pi / drive,
// delta = drive - mode. Linear in V on resonance; zero when the detuning
// completes full revolutions in phase space (delta T = 2 pi k).
double kick_to_alpha(const KickModel& kick);

}  // namespace rydion
