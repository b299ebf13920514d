#include "rydion/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rydion/rng.hpp"

namespace rydion {

namespace {

double to_u(const ParamSpec& p, double x) {
  switch (p.scale) {
    case ParamSpec::Scale::free:
      return x;
    case ParamSpec::Scale::positive:
      return std::log(x);
    case ParamSpec::Scale::unit_interval:
      return std::log(x / (1.0 - x));
    case ParamSpec::Scale::upper_bounded:
      return std::log(p.hi - x);
  }
  return x;
}

double to_x(const ParamSpec& p, double u) {
  switch (p.scale) {
    case ParamSpec::Scale::free:
      return u;
    case ParamSpec::Scale::positive:
      return std::exp(u);
    case ParamSpec::Scale::unit_interval:
      return 1.0 / (1.0 + std::exp(-u));
    case ParamSpec::Scale::upper_bounded:
      return p.hi - std::exp(u);
  }
  return u;
}

double dx_du(const ParamSpec& p, double x) {
  switch (p.scale) {
    case ParamSpec::Scale::free:
      return 1.0;
    case ParamSpec::Scale::positive:
      return x;
    case ParamSpec::Scale::unit_interval:
      return x * (1.0 - x);
    case ParamSpec::Scale::upper_bounded:
      return x - p.hi;  // magnitude is what matters
  }
  return 1.0;
}

// Pulls a jittered start back into the transform's domain.
double clamp_feasible(const ParamSpec& p, double x) {
  constexpr double margin = 1e-9;
  switch (p.scale) {
    case ParamSpec::Scale::free:
      return x;
    case ParamSpec::Scale::positive:
      return std::max(x, margin * std::max(std::abs(p.init), 1.0));
    case ParamSpec::Scale::unit_interval:
      return std::clamp(x, 1e-6, 1.0 - 1e-6);
    case ParamSpec::Scale::upper_bounded:
      return std::min(x, p.hi - margin * std::max(std::abs(p.hi), 1.0));
  }
  return x;
}

// In-place Cholesky solve of A d = b for symmetric positive definite A.
bool cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                    std::vector<double>& out) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0)) return false;
    diag = std::sqrt(diag);
    a[j * n + j] = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / diag;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
    b[i] = v / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= a[k * n + ii] * b[k];
    b[ii] = v / a[ii * n + ii];
  }
  out = std::move(b);
  return true;
}

struct Engine {
  const ResidualFn& fn;
  std::span<const ParamSpec> params;
  std::size_t m;  // residual count
  std::size_t n;  // parameter count

  std::vector<double> x_buf, r_buf;

  double eval(const std::vector<double>& u, std::vector<double>& r) {
    for (std::size_t j = 0; j < n; ++j) x_buf[j] = to_x(params[j], u[j]);
    fn(x_buf, r);
    double chi2 = 0.0;
    for (double v : r) chi2 += v * v;
    return std::isfinite(chi2) ? chi2 : std::numeric_limits<double>::max();
  }

  // Forward-difference Jacobian at u with residuals r0 already evaluated.
  void jacobian(const std::vector<double>& u, const std::vector<double>& r0,
                std::vector<double>& jac) {
    std::vector<double> up = u;
    std::vector<double> rp(m);
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1.5e-8 * std::max(std::abs(u[j]), 1.0);
      up[j] = u[j] + h;
      eval(up, rp);
      up[j] = u[j];
      for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (rp[i] - r0[i]) / h;
    }
  }

  Basin run(std::vector<double> u, int max_iterations, double rel_tol, double* grad_out,
            std::vector<double>* cov_out) {
    std::vector<double> r(m), r_try(m), jac(m * n), a(n * n), g(n), step, u_try(n);
    double chi2 = eval(u, r);
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    for (; iter < max_iterations; ++iter) {
      jacobian(u, r, jac);
      std::fill(a.begin(), a.end(), 0.0);
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          g[j] += jac[i * n + j] * r[i];
          for (std::size_t k = j; k < n; ++k) a[j * n + k] += jac[i * n + j] * jac[i * n + k];
        }
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < j; ++k) a[j * n + k] = a[k * n + j];

      double max_diag = 0.0;
      for (std::size_t j = 0; j < n; ++j) max_diag = std::max(max_diag, a[j * n + j]);
      if (max_diag == 0.0) {
        converged = true;  // flat objective: nothing to improve
        break;
      }

      bool accepted = false;
      for (int raise = 0; raise < 60; ++raise) {
        std::vector<double> damped = a;
        for (std::size_t j = 0; j < n; ++j)
          damped[j * n + j] += lambda * std::max(a[j * n + j], 1e-12 * max_diag);
        std::vector<double> rhs(n);
        for (std::size_t j = 0; j < n; ++j) rhs[j] = -g[j];
        if (cholesky_solve(std::move(damped), std::move(rhs), n, step)) {
          for (std::size_t j = 0; j < n; ++j) u_try[j] = u[j] + step[j];
          const double chi2_try = eval(u_try, r_try);
          if (chi2_try <= chi2) {
            const double drop = chi2 - chi2_try;
            u = u_try;
            r.swap(r_try);
            chi2 = chi2_try;
            lambda = std::max(lambda * 0.33, 1e-12);
            accepted = true;
            if (drop <= rel_tol * chi2 + 1e-300) converged = true;
            break;
          }
        }
        lambda *= 3.0;
        if (lambda > 1e14) break;
      }
      if (converged || !accepted) {
        // a stall with small gradient is a flat minimum, not a failure
        if (!accepted) {
          double gnorm = 0.0;
          for (double v : g) gnorm = std::max(gnorm, std::abs(v));
          converged = converged || gnorm <= 1e-8 * std::max(1.0, chi2);
        }
        break;
      }
    }

    if (grad_out || cov_out) {
      jacobian(u, r, jac);
      std::vector<double> a2(n * n, 0.0), g2(n, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          g2[j] += jac[i * n + j] * r[i];
          for (std::size_t k = j; k < n; ++k) a2[j * n + k] += jac[i * n + j] * jac[i * n + k];
        }
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < j; ++k) a2[j * n + k] = a2[k * n + j];
      if (grad_out) {
        double gnorm = 0.0;
        for (double v : g2) gnorm = std::max(gnorm, std::abs(v));
        *grad_out = gnorm;
      }
      if (cov_out) {
        // invert J^T J column by column; singular directions get huge sigma
        cov_out->assign(n * n, 0.0);
        for (std::size_t c = 0; c < n; ++c) {
          std::vector<double> e(n, 0.0);
          e[c] = 1.0;
          std::vector<double> col;
          std::vector<double> ridge = a2;
          bool ok = cholesky_solve(ridge, e, n, col);
          if (!ok) {
            for (std::size_t j = 0; j < n; ++j) ridge[j * n + j] = a2[j * n + j] * (1.0 + 1e-10) + 1e-30;
            ok = cholesky_solve(std::move(ridge), std::move(e), n, col);
          }
          if (ok)
            for (std::size_t rrow = 0; rrow < n; ++rrow) (*cov_out)[rrow * n + c] = col[rrow];
          else
            (*cov_out)[c * n + c] = std::numeric_limits<double>::infinity();
        }
      }
    }

    Basin b;
    b.x.resize(n);
    for (std::size_t j = 0; j < n; ++j) b.x[j] = to_x(params[j], u[j]);
    b.chi2 = chi2;
    b.converged = converged;
    b.iterations = iter;
    return b;
  }
};

}  // namespace

LeastSquaresResult least_squares(const ResidualFn& fn, std::span<const ParamSpec> params,
                                 std::size_t n_residuals, const LeastSquaresOptions& opts) {
  Engine eng{fn, params, n_residuals, params.size(), {}, {}};
  eng.x_buf.resize(params.size());
  eng.r_buf.resize(n_residuals);

  Rng jitter_rng = Rng::substream(opts.start_seed, 0x5eedULL);
  LeastSquaresResult result;
  result.chi2 = std::numeric_limits<double>::max();

  const int starts = std::max(1, opts.starts);
  for (int s = 0; s < starts; ++s) {
    std::vector<double> u0(params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
      double x0 = params[j].init;
      if (s > 0 && params[j].jitter > 0.0)
        x0 = clamp_feasible(params[j], jitter_rng.normal(x0, params[j].jitter));
      u0[j] = to_u(params[j], clamp_feasible(params[j], x0));
    }
    Basin basin = eng.run(std::move(u0), opts.max_iterations, opts.rel_tol, nullptr, nullptr);
    result.basins.push_back(basin);
    // a stalled start with a deep chi2 still beats a converged shallow one:
    // the polish pass below resumes descent from whichever point wins
    if (basin.chi2 < result.chi2) {
      result.chi2 = basin.chi2;
      result.x = basin.x;
      result.converged = basin.converged;
      result.iterations = basin.iterations;
    }
  }

  // polish pass from the winner to harvest gradient and covariance
  std::vector<double> u_best(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) u_best[j] = to_u(params[j], result.x[j]);
  std::vector<double> cov_u;
  Basin polished = eng.run(std::move(u_best), opts.max_iterations, opts.rel_tol,
                           &result.grad_norm, &cov_u);
  if (polished.chi2 <= result.chi2) {
    result.chi2 = polished.chi2;
    result.x = polished.x;
    result.converged = result.converged || polished.converged;
  }

  result.sigma.resize(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    const double var_u = cov_u.empty() ? std::numeric_limits<double>::infinity()
                                       : std::max(cov_u[j * params.size() + j], 0.0);
    result.sigma[j] = std::sqrt(var_u) * std::abs(dx_du(params[j], result.x[j]));
  }
  return result;
}

}  // namespace rydion
