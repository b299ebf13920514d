#pragma once

#include <complex>

namespace rydion {

// w(z) = exp(-z^2) erfc(-iz) for Im(z) >= 0.
//
// Rational approximation after Weideman, SIAM J. Numer. Anal. 31 (1994),
// with N = 36 terms, switching to a Laplace continued fraction for
// |z| > 16 and to exp(-x^2) exactly on the real axis.
//
// Accuracy of the real part: <= ~1e-7 relative wherever Re w >= 1e-8;
// in deeper Gaussian wings the error stays below ~5e-16 absolute, so the
// relative error degrades only where the profile is below 1e-8 of scale.
std::complex<double> faddeeva(std::complex<double> z);

// Re w(x + iy), y >= 0. The Voigt workhorse.
double faddeeva_real(double x, double y);

// exp(t^2) erfc(t) for t >= 0, equal to w(i t); used for peak values.
double erfcx(double t);

}  // namespace rydion
