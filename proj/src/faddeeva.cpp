#include "rydion/faddeeva.hpp"

#include <array>
#include <cmath>

namespace rydion {

namespace {

constexpr double inv_sqrt_pi = 0.5641895835477562869;

// Weideman rational approximation, N = 36. L = sqrt(N / sqrt(2)).
constexpr double weideman_l = 5.045378491522287;

// Polynomial coefficients in Z = (L + iz)/(L - iz), highest degree first.
constexpr std::array<double, 36> weideman_a = {
    5.353549393917312725e-14,  -8.061168438014101009e-14, -3.240267634165634077e-13,
    4.429849378906953357e-13,  2.097947304161712490e-12,  -2.117034533577602948e-12,
    -1.431258514152495759e-11, 6.346276609370551942e-12,  9.939327348449196439e-11,
    3.197210398816970825e-11,  -6.634846567206610160e-10, -9.092238093041557172e-10,
    3.773443075419045870e-09,  1.188388721024359908e-08,  -1.096227792612736329e-08,
    -1.130315719868339434e-07, -1.289484292586831396e-07, 6.741655663013239941e-07,
    2.765408665639563463e-06,  1.418705847930154831e-06,  -2.174118656549445524e-05,
    -8.817797141849294728e-05, -1.139663064445943090e-04, 4.629031693998851473e-04,
    3.548444708699669253e-03,  1.389825376325140235e-02,  4.105104301657688803e-02,
    1.008429337184794938e-01,  2.150163632010739512e-01,  4.073424189503340731e-01,
    6.956621918971001017e-01,  1.081358037176588738e+00,  1.540162578815365224e+00,
    2.019397643611350546e+00,  2.445378492851920882e+00,  2.740745027409860146e+00,
};

std::complex<double> weideman(std::complex<double> z) {
  const std::complex<double> d = weideman_l - std::complex<double>(0.0, 1.0) * z;
  const std::complex<double> big_z = (weideman_l + std::complex<double>(0.0, 1.0) * z) / d;
  std::complex<double> p = 0.0;
  for (double a : weideman_a) p = p * big_z + a;
  return 2.0 * p / (d * d) + inv_sqrt_pi / d;
}

// Laplace continued fraction, 8 terms; accurate for |z| > 16 with Im z >= 0.
std::complex<double> continued_fraction(std::complex<double> z) {
  std::complex<double> cf = 0.0;
  for (int k = 8; k >= 1; --k) cf = (0.5 * k) / (z - cf);
  return std::complex<double>(0.0, inv_sqrt_pi) / (z - cf);
}

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
  const double x = z.real();
  const double y = z.imag();
  std::complex<double> w = (x * x + y * y > 256.0) ? continued_fraction(z) : weideman(z);
  if (y == 0.0) w.real(std::exp(-x * x));
  return w;
}

double faddeeva_real(double x, double y) {
  if (y == 0.0) return std::exp(-x * x);
  return faddeeva(std::complex<double>(x, y)).real();
}

double erfcx(double t) {
  if (t == 0.0) return 1.0;
  return faddeeva(std::complex<double>(0.0, t)).real();
}

}  // namespace rydion
