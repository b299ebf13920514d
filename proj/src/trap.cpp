#include "rydion/trap.hpp"

#include <cmath>
#include <string>

#include "rydion/constants.hpp"
#include "rydion/errors.hpp"

namespace rydion {

namespace {

double checked_sqrt(double radicand, const char* mode) {
  if (!(radicand > 0.0))
    throw UnconfinedTrap(std::string("mode ") + mode +
                         " radicand non-positive: " + std::to_string(radicand));
  return std::sqrt(radicand);
}

}  // namespace

ModeFrequencies secular_frequencies(const TrapParameters& trap, Polarizability pol) {
  const double e = elementary_charge;
  const double m = trap.mass;
  const double grf = trap.gamma_rf;
  const double gdc = trap.gamma_dc;
  const double pseudo = 2.0 * e * e * grf * grf / (m * m * trap.omega_rf * trap.omega_rf);

  const double dcx = gdc * (1.0 + trap.epsilon);
  const double dcy = gdc * (1.0 - trap.epsilon);

  ModeFrequencies w;
  w.x = checked_sqrt(pseudo - 2.0 * e * dcx / m - 2.0 * pol.si * (grf * grf + dcx * dcx) / m, "x");
  w.y = checked_sqrt(pseudo - 2.0 * e * dcy / m - 2.0 * pol.si * (grf * grf + dcy * dcy) / m, "y");
  w.z = checked_sqrt(4.0 * e * gdc / m - 16.0 * pol.si * gdc * gdc / m, "z");
  return w;
}

TrapParameters calibrate_gradients(double omega_x, double omega_y, double omega_z,
                                   double omega_rf, double mass) {
  if (!(omega_x > 0.0 && omega_y > 0.0 && omega_z > 0.0 && omega_rf > 0.0 && mass > 0.0))
    throw InconsistentFrequencies("all frequencies and the mass must be positive");

  const double e = elementary_charge;
  const double wx2 = omega_x * omega_x;
  const double wy2 = omega_y * omega_y;
  const double wz2 = omega_z * omega_z;

  // wz^2 = 4 e gdc / m fixes gdc; the radial splitting wx^2 - wy^2 = -eps wz^2
  // fixes eps; the radial sum fixes the RF pseudopotential term.
  const double gdc = mass * wz2 / (4.0 * e);
  const double epsilon = -(wx2 - wy2) / wz2;
  const double pseudo = 0.5 * (wx2 + wy2 + wz2);
  const double grf2 = pseudo * mass * mass * omega_rf * omega_rf / (2.0 * e * e);
  if (!(grf2 > 0.0) || !(gdc > 0.0))
    throw InconsistentFrequencies("target frequencies require non-physical gradients");

  return TrapParameters{std::sqrt(grf2), gdc, omega_rf, epsilon, mass};
}

ModeShifts line_shift_per_phonon(const TrapParameters& trap, Polarizability pol) {
  const ModeFrequencies shifted = secular_frequencies(trap, pol);
  const ModeFrequencies bare = secular_frequencies(trap, Polarizability{0.0});
  return ModeShifts{shifted.x - bare.x, shifted.y - bare.y, shifted.z - bare.z};
}

Polarizability confinement_limit(const TrapParameters& trap) {
  const ModeFrequencies bare = secular_frequencies(trap, Polarizability{0.0});
  const double m = trap.mass;
  const double grf2 = trap.gamma_rf * trap.gamma_rf;
  const double dcx = trap.gamma_dc * (1.0 + trap.epsilon);
  const double dcy = trap.gamma_dc * (1.0 - trap.epsilon);
  const double px = bare.x * bare.x * m / (2.0 * (grf2 + dcx * dcx));
  const double py = bare.y * bare.y * m / (2.0 * (grf2 + dcy * dcy));
  const double pz = elementary_charge / (4.0 * trap.gamma_dc);
  return Polarizability{std::min({px, py, pz})};
}

}  // namespace rydion
