#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rydion {

// One fit parameter. Transforms keep the optimizer unconstrained while the
// model only ever sees feasible values; uncertainties are mapped back by the
// delta method.
struct ParamSpec {
  std::string name;
  double init = 0.0;

  enum class Scale {
    free,           // u = x
    positive,       // u = ln x, x > 0
    unit_interval,  // u = logit(x), x in (0, 1)
    upper_bounded,  // u = ln(hi - x), x < hi
  };
  Scale scale = Scale::free;
  double hi = 0.0;      // upper_bounded only
  double jitter = 0.0;  // multi-start perturbation sd, in x units (0 = keep fixed)
};

struct LeastSquaresOptions {
  int max_iterations = 500;
  double rel_tol = 1e-10;  // relative chi^2 decrease that counts as converged
  int starts = 8;
  std::uint64_t start_seed = 0;
};

// Outcome of one start, in model space.
struct Basin {
  std::vector<double> x;
  double chi2 = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct LeastSquaresResult {
  std::vector<double> x;       // best-fit parameters
  std::vector<double> sigma;   // 1-sigma intervals, delta method from (J^T J)^-1
  double chi2 = 0.0;
  double grad_norm = 0.0;      // |J^T r|_inf at the optimum (transform space)
  bool converged = false;
  int iterations = 0;          // of the winning start
  std::vector<Basin> basins;   // all starts, for multi-modality diagnostics
};

// Weighted residuals at model-space parameters x; r is pre-sized.
using ResidualFn = std::function<void(std::span<const double> x, std::vector<double>& r)>;

// Damped Gauss-Newton (Levenberg-Marquardt) with forward-difference
// Jacobians and multi-start. Never throws on its own; converged=false means
// every start stalled.
LeastSquaresResult least_squares(const ResidualFn& fn, std::span<const ParamSpec> params,
                                 std::size_t n_residuals, const LeastSquaresOptions& opts);

}  // namespace rydion
