#include "rydion/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/faddeeva.hpp"
#include "rydion/optim.hpp"

namespace rydion {

double FitResult::value(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p.value;
  throw Error("no fit parameter named " + std::string(name));
}

double FitResult::sigma(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p.sigma;
  throw Error("no fit parameter named " + std::string(name));
}

namespace {

constexpr double sqrt2 = 1.4142135623730951;
constexpr double inv_sqrt_2pi = 0.3989422804014327;

// Binomial standard error with the count pulled toward 1/2 (Agresti-Coull),
// so a 0-of-N point gets a realistic error bar instead of the bare floor;
// the 1/(2 shots) floor still guards the extreme-N case.
double point_sigma(double p, std::int64_t shots) {
  const double s = static_cast<double>(shots);
  const double centered = (p * s + 2.0) / (s + 4.0);
  return std::max(std::sqrt(centered * (1.0 - centered) / s), 1.0 / (2.0 * s));
}

std::vector<double> dataset_sigmas(std::span<const double> probs, std::int64_t shots) {
  if (shots < 1) throw ConfigError("fit data needs a positive shot count");
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = point_sigma(probs[i], shots);
  return out;
}

// Coupling factors rabi_frequency(n, s, 1, eta), grown on demand.
class CouplingTable {
 public:
  CouplingTable(int s, double eta) : s_(s), eta_(eta) {}

  double operator()(int n) {
    if (n + s_ < 0) return 0.0;
    while (static_cast<int>(f_.size()) <= n) {
      const int k = static_cast<int>(f_.size());
      f_.push_back(k + s_ < 0 ? 0.0 : rabi_frequency(k, s_, 1.0, eta_));
    }
    return f_[static_cast<std::size_t>(n)];
  }

 private:
  int s_;
  double eta_;
  std::vector<double> f_;
};

// Iterative thermal weights: p_0 = 1/(nbar+1), ratio nbar/(nbar+1).
int thermal_support(double nbar, double tail_mass) {
  if (nbar <= 0.0) return 0;
  const double r = std::log(nbar / (nbar + 1.0));
  return std::max(0, static_cast<int>(std::ceil(std::log(tail_mass) / r)) + 1);
}

struct CurveData {
  const RabiDataset* data;
  std::vector<double> sigma;
  int sideband;
};

FitResult package(const std::vector<FitParameter>& params, const LeastSquaresResult& lsq) {
  FitResult fr;
  fr.parameters = params;
  fr.residual_norm = lsq.chi2;
  fr.grad_norm = lsq.grad_norm;
  fr.converged = lsq.converged;
  fr.iterations = lsq.iterations;
  return fr;
}

// ---------------------------------------------------------------- spectra

struct JointLine {
  int nx = 0, ny = 0;
  double weight = 0.0;
};

std::vector<JointLine> joint_lines(const SpectrumPrep& prep, double tail_mass) {
  const int nx_max = truncation_bound(prep.x, tail_mass);
  const int ny_max = truncation_bound(prep.y, tail_mass);
  const std::size_t joint =
      (static_cast<std::size_t>(nx_max) + 1) * (static_cast<std::size_t>(ny_max) + 1);
  const double prune = tail_mass / static_cast<double>(joint);

  std::vector<double> px(static_cast<std::size_t>(nx_max) + 1);
  std::vector<double> py(static_cast<std::size_t>(ny_max) + 1);
  for (int n = 0; n <= nx_max; ++n) px[static_cast<std::size_t>(n)] = prep.x.pmf(n);
  for (int n = 0; n <= ny_max; ++n) py[static_cast<std::size_t>(n)] = prep.y.pmf(n);

  std::vector<JointLine> lines;
  lines.reserve(joint / 4 + 8);
  for (int ix = 0; ix <= nx_max; ++ix)
    for (int iy = 0; iy <= ny_max; ++iy) {
      const double w = px[static_cast<std::size_t>(ix)] * py[static_cast<std::size_t>(iy)];
      if (w >= prune) lines.push_back(JointLine{ix, iy, w});
    }
  return lines;
}

// Precomputed Voigt density with cubic Hermite interpolation; exact
// evaluation outside the covered range and for pure Lorentzians. Deviation
// from the exact profile is below 1e-6 of the peak (checked in tests).
class VoigtTable {
 public:
  VoigtTable(const VoigtParams& vp, double x_max) : vp_(vp) {
    if (vp_.sigma == 0.0) return;  // Lorentzian closed form is cheap already
    n_ = 4096;
    x_max_ = std::max(x_max, vp_.sigma);
    h_ = x_max_ / static_cast<double>(n_ - 1);
    v_.resize(n_);
    d_.resize(n_);
    const double inv = 1.0 / (vp_.sigma * sqrt2);
    const double c1 = inv_sqrt_2pi / vp_.sigma;
    const double y0 = 0.5 * vp_.gamma_l * inv;
    for (std::size_t i = 0; i < n_; ++i) {
      const double x = static_cast<double>(i) * h_;
      const std::complex<double> z(x * inv, y0);
      const std::complex<double> w = faddeeva(z);
      v_[i] = c1 * w.real();
      const std::complex<double> wp =
          -2.0 * z * w + std::complex<double>(0.0, 2.0 / std::sqrt(pi));
      d_[i] = c1 * wp.real() * inv;
    }
  }

  double operator()(double x) const {
    const double ax = std::abs(x);
    if (v_.empty() || ax >= x_max_) return voigt_profile(ax, 0.0, vp_);
    const double u = ax / h_;
    const std::size_t i = std::min(static_cast<std::size_t>(u), n_ - 2);
    const double t = u - static_cast<double>(i);
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * v_[i] + (t3 - 2.0 * t2 + t) * h_ * d_[i] +
           (-2.0 * t3 + 3.0 * t2) * v_[i + 1] + (t3 - t2) * h_ * d_[i + 1];
  }

 private:
  VoigtParams vp_;
  std::size_t n_ = 0;
  double x_max_ = 0.0, h_ = 0.0;
  std::vector<double> v_, d_;
};

double data_centroid(const SpectrumDataset& d) {
  double base = *std::min_element(d.prob.begin(), d.prob.end());
  double wsum = 0.0, msum = 0.0;
  for (std::size_t i = 0; i < d.prob.size(); ++i) {
    const double w = d.prob[i] - base;
    wsum += w;
    msum += w * d.detuning[i];
  }
  return wsum > 0.0 ? msum / wsum : 0.0;
}

}  // namespace

// ------------------------------------------------------------ thermal fit

FitResult fit_thermal_sidebands(const RabiDataset& carrier, const RabiDataset& red,
                                const RabiDataset& blue, double eta, const FitOptions& opts) {
  if (carrier.tau.empty() || red.tau.empty() || blue.tau.empty())
    throw ConfigError("thermal fit needs non-empty carrier, red and blue datasets");

  std::vector<CurveData> curves = {
      {&carrier, dataset_sigmas(carrier.prob, carrier.shots), 0},
      {&red, dataset_sigmas(red.prob, red.shots), -1},
      {&blue, dataset_sigmas(blue.prob, blue.shots), +1},
  };
  std::vector<CouplingTable> tables;
  for (const auto& c : curves) tables.emplace_back(c.sideband, eta);

  std::size_t m = 0;
  for (const auto& c : curves) m += c.data->tau.size();
  const double tail = opts.tail_mass;

  auto residuals = [&](std::span<const double> x, std::vector<double>& r) {
    // hard range keeps a wandering step from requesting a gigantic support
    const double nbar = std::clamp(x[0], 0.0, 300.0);
    const double omega0 = x[1];
    const double gamma = std::max(x[2], 0.0);
    const double amp = x[3];
    const int n_max = std::min(thermal_support(nbar, tail), 4000);
    const double p0 = 1.0 / (nbar + 1.0);
    const double ratio = nbar / (nbar + 1.0);
    std::size_t k = 0;
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const auto& cd = curves[c];
      auto& f = tables[c];
      for (std::size_t i = 0; i < cd.data->tau.size(); ++i) {
        const double tau = cd.data->tau[i];
        double acc = 0.0, w = p0;
        for (int n = 0; n <= n_max; ++n, w *= ratio)
          acc += w * (1.0 - std::cos(omega0 * f(n) * tau));
        const double model = 0.5 * amp * acc * std::exp(-gamma * tau);
        r[k] = (model - cd.data->prob[i]) / cd.sigma[i];
        ++k;
      }
    }
  };

  // starts: contrast from the carrier, flopping rate from a coarse scan of
  // candidate frequencies with the amplitude solved analytically per trial, so
  // a single noisy grid point cannot alias the estimate onto the wrong flop
  const double p_max = *std::max_element(carrier.prob.begin(), carrier.prob.end());
  const double a_init = std::clamp(p_max, 0.05, 0.98);
  const double tau_span = carrier.tau.back();
  double dt_min = tau_span;
  for (std::size_t i = 1; i < carrier.tau.size(); ++i)
    dt_min = std::min(dt_min, carrier.tau[i] - carrier.tau[i - 1]);
  const auto& csig = curves[0].sigma;
  double omega0_init = 0.5 * pi / tau_span;
  double sse_best = std::numeric_limits<double>::max();
  const double om_lo = 0.5 * pi / tau_span, om_hi = pi / dt_min;
  for (int t = 0; t <= 400; ++t) {
    const double om = om_lo + (om_hi - om_lo) * t / 400.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < carrier.tau.size(); ++i) {
      const double g = 0.5 * (1.0 - std::cos(om * carrier.tau[i]));
      const double w = 1.0 / (csig[i] * csig[i]);
      num += w * g * carrier.prob[i];
      den += w * g * g;
    }
    const double a = std::clamp(den > 0.0 ? num / den : 0.0, 0.05, 1.0);
    double sse = 0.0;
    for (std::size_t i = 0; i < carrier.tau.size(); ++i) {
      const double g = 0.5 * (1.0 - std::cos(om * carrier.tau[i]));
      const double r = (carrier.prob[i] - a * g) / csig[i];
      sse += r * r;
    }
    if (sse < sse_best) {
      sse_best = sse;
      omega0_init = om;
    }
  }

  // occupation start from the red/blue ratio, which approaches nbar/(nbar+1)
  double red_sum = 0.0, blue_sum = 0.0;
  for (double p : red.prob) red_sum += p;
  for (double p : blue.prob) blue_sum += p;
  const double ratio = std::clamp(blue_sum > 0.0 ? red_sum / blue_sum : 0.0, 0.0, 0.96);
  const double nbar_init = std::clamp(ratio / (1.0 - ratio), 0.02, 24.0);

  std::vector<ParamSpec> params = {
      {"nbar", nbar_init, ParamSpec::Scale::free, 0.0,
       std::max(0.3 * nbar_init, 0.2)},
      {"omega0", omega0_init, ParamSpec::Scale::positive, 0.0, 0.1 * omega0_init},
      {"gamma", 0.1 / tau_span, ParamSpec::Scale::free, 0.0, 0.3 / tau_span},
      {"amplitude", a_init, ParamSpec::Scale::unit_interval, 0.0, 0.05},
  };
  LeastSquaresOptions lopts{opts.max_iterations, opts.rel_tol, opts.starts, opts.seed};
  const auto lsq = least_squares(residuals, params, m, lopts);
  if (!lsq.converged) throw NonConvergence("thermal sideband fit did not converge");

  std::vector<FitParameter> out = {
      {"nbar", std::clamp(lsq.x[0], 0.0, 300.0), lsq.sigma[0], "phonons"},
      {"omega0", lsq.x[1] / mhz, lsq.sigma[1] / mhz, "MHz"},
      {"gamma", std::max(lsq.x[2], 0.0) * us, lsq.sigma[2] * us, "1/us"},
      {"amplitude", lsq.x[3], lsq.sigma[3], "probability"},
  };
  return package(out, lsq);
}

// ------------------------------------------------------------ coherent fit

FitResult fit_coherent_alpha(const RabiDataset& red, const RabiDataset& blue,
                             const FixedRabiParams& fixed, const FitOptions& opts) {
  if (red.tau.empty() || blue.tau.empty())
    throw ConfigError("coherent fit needs non-empty red and blue datasets");

  std::vector<CurveData> curves = {
      {&red, dataset_sigmas(red.prob, red.shots), -1},
      {&blue, dataset_sigmas(blue.prob, blue.shots), +1},
  };
  std::vector<CouplingTable> tables;
  for (const auto& c : curves) tables.emplace_back(c.sideband, fixed.eta);

  std::size_t m = 0;
  for (const auto& c : curves) m += c.data->tau.size();
  const double tail = opts.tail_mass;

  auto residuals = [&](std::span<const double> x, std::vector<double>& r) {
    // |alpha| <= 40 bounds the Poisson support a stray step can ask for
    const double alpha = std::clamp(x[0], 0.0, 40.0);
    const double mean = alpha * alpha;
    // Poisson support to the tail bound, weights built iteratively
    int n_max = 0;
    {
      double w = std::exp(-mean), cum = w;
      while ((cum < 1.0 - tail || n_max < mean) && n_max < 100000) {
        ++n_max;
        w *= mean / n_max;
        cum += w;
      }
    }
    std::size_t k = 0;
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const auto& cd = curves[c];
      auto& f = tables[c];
      f(n_max);  // grow once
      for (std::size_t i = 0; i < cd.data->tau.size(); ++i) {
        const double tau = cd.data->tau[i];
        double acc = 0.0, w = std::exp(-mean);
        for (int n = 0; n <= n_max; ++n) {
          acc += w * (1.0 - std::cos(fixed.omega0 * f(n) * tau));
          w *= mean / (n + 1);
        }
        const double model = 0.5 * fixed.amplitude * acc * std::exp(-fixed.gamma_dec * tau);
        r[k] = (model - cd.data->prob[i]) / cd.sigma[i];
        ++k;
      }
    }
  };

  double init = opts.init_hint.value_or(-1.0);
  if (!(init >= 0.0)) {
    // deterministic scan: pick the best cell of a coarse |alpha| grid
    double best = std::numeric_limits<double>::max();
    std::vector<double> r(m);
    for (double a = 0.25; a <= 13.0; a += (a < 2.0 ? 0.25 : 0.5)) {
      double x[1] = {a};
      residuals(std::span<const double>(x, 1), r);
      double chi2 = 0.0;
      for (double v : r) chi2 += v * v;
      if (chi2 < best) {
        best = chi2;
        init = a;
      }
    }
  }

  std::vector<ParamSpec> params = {{"alpha", init, ParamSpec::Scale::free, 0.0, 0.5}};
  LeastSquaresOptions lopts{opts.max_iterations, opts.rel_tol, opts.starts, opts.seed};
  const auto lsq = least_squares(residuals, params, m, lopts);
  if (!lsq.converged) throw NonConvergence("coherent |alpha| fit did not converge");

  // statistically indistinguishable separated basins are reported, not hidden
  const double alpha_best = std::clamp(lsq.x[0], 0.0, 40.0);
  const double sep = std::max(5.0 * lsq.sigma[0], 0.25);
  for (const auto& b : lsq.basins) {
    if (!b.converged) continue;
    const double a = std::max(b.x[0], 0.0);
    if (std::abs(a - alpha_best) > sep && b.chi2 - lsq.chi2 < 1.0)
      throw AmbiguousFit("|alpha| basins " + std::to_string(alpha_best) + " and " +
                         std::to_string(a) + " fit equally well");
  }

  std::vector<FitParameter> out = {{"alpha", alpha_best, lsq.sigma[0], "dimensionless"}};
  return package(out, lsq);
}

// ------------------------------------------------------- spectrum pair fit

FitResult fit_spectrum_pair(const SpectrumDataset& reference, const SpectrumPrep& ref_prep,
                            const SpectrumDataset& excited, const SpectrumPrep& exc_prep,
                            const TrapParameters& trap, const VoigtParams& widths,
                            const FitOptions& opts) {
  if (reference.detuning.empty() || excited.detuning.empty())
    throw ConfigError("spectrum pair fit needs two non-empty datasets");

  const auto ref_lines = joint_lines(ref_prep, opts.tail_mass);
  const auto exc_lines = joint_lines(exc_prep, opts.tail_mass);
  const auto ref_sigma = dataset_sigmas(reference.prob, reference.shots);
  const auto exc_sigma = dataset_sigmas(excited.prob, excited.shots);
  const double vpeak = voigt_peak(widths);
  const double limit_e30 = confinement_limit(trap).e30();
  const double hi_e30 = 0.98 * limit_e30;

  const auto [ref_x_mean, ref_x_var] = moments(ref_prep.x);
  const auto [ref_y_mean, ref_y_var] = moments(ref_prep.y);
  const auto [exc_x_mean, exc_x_var] = moments(exc_prep.x);
  const auto [exc_y_mean, exc_y_var] = moments(exc_prep.y);

  // initial polarizability from the centroid difference of the raw data
  const double d_obs = data_centroid(excited) - data_centroid(reference);
  double pol_init = 0.0;
  if (d_obs < 0.0) {
    double lo = 0.0, hi = hi_e30;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto sh = line_shift_per_phonon(trap, Polarizability::from_e30(mid));
      const double d = (exc_x_mean - ref_x_mean) * sh.x + (exc_y_mean - ref_y_mean) * sh.y;
      (d > d_obs ? lo : hi) = mid;
    }
    pol_init = 0.5 * (lo + hi);
  }
  const auto sh0 = line_shift_per_phonon(trap, Polarizability::from_e30(pol_init));
  const double nu0_init = data_centroid(reference) - ref_x_mean * sh0.x - ref_y_mean * sh0.y;

  int n_y_max = 0, n_x_max = 0;
  for (const auto& l : ref_lines) {
    n_x_max = std::max(n_x_max, l.nx);
    n_y_max = std::max(n_y_max, l.ny);
  }
  for (const auto& l : exc_lines) {
    n_x_max = std::max(n_x_max, l.nx);
    n_y_max = std::max(n_y_max, l.ny);
  }
  double det_span = 0.0;
  for (double d : reference.detuning) det_span = std::max(det_span, std::abs(d - nu0_init));
  for (double d : excited.detuning) det_span = std::max(det_span, std::abs(d - nu0_init));
  const auto sh_wide =
      line_shift_per_phonon(trap, Polarizability::from_e30(std::min(3.0 * pol_init + 1.0, hi_e30)));
  const double x_max =
      det_span + std::abs(sh_wide.x) * n_x_max + std::abs(sh_wide.y) * n_y_max + 10.0 * widths.sigma;
  const VoigtTable table(widths, x_max);

  struct Block {
    const SpectrumDataset* data;
    const std::vector<JointLine>* lines;
    const std::vector<double>* sigma;
    int amp_index, base_index;
  };
  const std::array<Block, 2> blocks = {
      Block{&reference, &ref_lines, &ref_sigma, 2, 4},
      Block{&excited, &exc_lines, &exc_sigma, 3, 5},
  };
  const std::size_t m = reference.detuning.size() + excited.detuning.size();

  auto residuals = [&](std::span<const double> x, std::vector<double>& r) {
    const double nu0 = x[0];
    const auto sh = line_shift_per_phonon(trap, Polarizability::from_e30(x[1]));
    std::size_t k = 0;
    for (const auto& blk : blocks) {
      const double amp = x[static_cast<std::size_t>(blk.amp_index)];
      const double base = x[static_cast<std::size_t>(blk.base_index)];
      for (std::size_t i = 0; i < blk.data->detuning.size(); ++i) {
        const double det = blk.data->detuning[i] - nu0;
        double acc = 0.0;
        for (const auto& l : *blk.lines) acc += l.weight * table(det - l.nx * sh.x - l.ny * sh.y);
        const double model = base + amp * acc / vpeak;
        r[k] = (model - blk.data->prob[i]) / (*blk.sigma)[i];
        ++k;
      }
    }
  };

  auto amp_init = [](const SpectrumDataset& d) {
    const auto [mn, mx] = std::minmax_element(d.prob.begin(), d.prob.end());
    return std::clamp(*mx - *mn, 0.02, 0.98);
  };
  auto base_init = [](const SpectrumDataset& d) {
    return std::clamp(*std::min_element(d.prob.begin(), d.prob.end()), 1e-4, 0.5);
  };

  std::vector<ParamSpec> params = {
      {"nu0", nu0_init, ParamSpec::Scale::free, 0.0, 0.2 * mhz},
      {"pol", opts.init_hint.value_or(pol_init), ParamSpec::Scale::upper_bounded, hi_e30,
       std::max(0.15 * pol_init, 0.1)},
      {"amp_ref", amp_init(reference), ParamSpec::Scale::unit_interval, 0.0, 0.05},
      {"amp_exc", amp_init(excited), ParamSpec::Scale::unit_interval, 0.0, 0.05},
      {"base_ref", base_init(reference), ParamSpec::Scale::unit_interval, 0.0, 0.01},
      {"base_exc", base_init(excited), ParamSpec::Scale::unit_interval, 0.0, 0.01},
  };
  LeastSquaresOptions lopts{opts.max_iterations, opts.rel_tol, opts.starts, opts.seed};
  const auto lsq = least_squares(residuals, params, m, lopts);
  if (!lsq.converged) throw NonConvergence("spectrum pair fit did not converge");

  std::vector<FitParameter> out = {
      {"nu0", lsq.x[0] / mhz, lsq.sigma[0] / mhz, "MHz"},
      {"pol", lsq.x[1], lsq.sigma[1], "1e-30 C m^2 / V"},
      {"amp_ref", lsq.x[2], lsq.sigma[2], "probability"},
      {"amp_exc", lsq.x[3], lsq.sigma[3], "probability"},
      {"base_ref", lsq.x[4], lsq.sigma[4], "probability"},
      {"base_exc", lsq.x[5], lsq.sigma[5], "probability"},
  };
  return package(out, lsq);
}

std::pair<double, double> weighted_average(
    std::span<const std::pair<double, double>> estimates) {
  if (estimates.empty()) throw ConfigError("weighted average of nothing");
  double wsum = 0.0, xsum = 0.0;
  for (const auto& [value, sigma] : estimates) {
    if (!(sigma > 0.0)) throw ConfigError("weighted average requires positive uncertainties");
    const double w = 1.0 / (sigma * sigma);
    wsum += w;
    xsum += w * value;
  }
  return {xsum / wsum, std::sqrt(1.0 / wsum)};
}

}  // namespace rydion
