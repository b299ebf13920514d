#pragma once

namespace rydion {

// Static scalar polarizability of the Rydberg state, C m^2 / V.
// Carried as a strong type so SI values and 1e-30 I/O units cannot mix.
struct Polarizability {
  double si = 0.0;

  static constexpr Polarizability from_e30(double v) { return {v * 1e-30}; }
  constexpr double e30() const { return si * 1e30; }
};

// Quadrupole field gradients and drive of the linear Paul trap.
// gamma_rf, gamma_dc in V/m^2; omega_rf in rad/s; mass in kg.
// epsilon is the static-field asymmetry between the radial directions;
// x carries (1 + epsilon), y carries (1 - epsilon).
struct TrapParameters {
  double gamma_rf = 0.0;
  double gamma_dc = 0.0;
  double omega_rf = 0.0;
  double epsilon = 0.0;
  double mass = 0.0;
};

struct ModeFrequencies {
  double x = 0.0, y = 0.0, z = 0.0;  // rad/s, all positive
};

struct ModeShifts {
  double x = 0.0, y = 0.0, z = 0.0;  // rad/s per phonon, negative for pol > 0
};

// Secular frequencies of an ion whose electronic state has polarizability
// pol. The quadratic Stark shift -P E^2 / 2 stiffens or softens the
// pseudopotential; the exact square-root expressions are evaluated, no
// small-pol expansion. Throws UnconfinedTrap when a radicand is <= 0.
ModeFrequencies secular_frequencies(const TrapParameters& trap, Polarizability pol);

// Inverts the zero-polarizability frequency expressions: given measured
// ground-state secular frequencies, recovers the gradient set. Closed form;
// round-trips through secular_frequencies to 1e-12 relative.
// Throws InconsistentFrequencies when no physical gradients exist.
TrapParameters calibrate_gradients(double omega_x, double omega_y, double omega_z,
                                   double omega_rf, double mass);

// Per-phonon line shift of each mode: delta_i = w'_i(pol) - w_i(0).
ModeShifts line_shift_per_phonon(const TrapParameters& trap, Polarizability pol);

// Largest polarizability that keeps every mode confined (all radicands
// positive); fit transforms use it as a hard upper bound.
Polarizability confinement_limit(const TrapParameters& trap);

}  // namespace rydion
