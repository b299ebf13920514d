#pragma once

#include <utility>
#include <vector>

namespace rydion {

// Phonon-number law of one motional mode. Thermal and coherent states cover
// the physics in scope; fock and tabulated laws exist for tests and for
// engineered preparations. Only |alpha| enters anywhere, the phase never does.
class PhononDistribution {
 public:
  enum class Kind { thermal, coherent, fock, tabulated };

  static PhononDistribution thermal(double nbar);
  static PhononDistribution coherent(double alpha);
  static PhononDistribution fock(int n);
  // Probabilities by phonon number; must sum to 1 within 1e-6 (renormalized).
  static PhononDistribution tabulated(const std::vector<std::pair<int, double>>& weights);

  double pmf(int n) const;
  Kind kind() const { return kind_; }
  double nbar() const { return nbar_; }
  double alpha() const { return alpha_; }
  int fock_n() const { return fock_n_; }
  const std::vector<double>& table() const { return table_; }

 private:
  PhononDistribution() = default;
  Kind kind_ = Kind::fock;
  double nbar_ = 0.0;
  double alpha_ = 0.0;
  int fock_n_ = 0;
  std::vector<double> table_;
};

// Poisson mass with mean alpha^2, evaluated in log space; stable to n >= 300.
double coherent_pmf(double alpha, int n);

// Geometric law p_n = nbar^n / (nbar+1)^(n+1); nbar = 0 degenerates to |0>.
double thermal_pmf(double nbar, int n);

// Smallest N with total mass above N at most tail_mass.
int truncation_bound(const PhononDistribution& dist, double tail_mass);

// (mean, variance), closed form where available, direct sums for tables.
std::pair<double, double> moments(const PhononDistribution& dist);

}  // namespace rydion
