#pragma once

#include <functional>

#include "polsqueeze/errors.hpp"

namespace polsq {

/// Tolerances and budgets shared by every numerical integral in the engine.
struct QuadConfig {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;  ///< absolute floor; convergence needs err <= max(abs, rel*|v|)
  /// Frequency-cutoff factor (units of delta_nu) kept for config-schema
  /// stability; the Fourier paths integrate the full half-line, so this acts
  /// only as a sanity guard, never a truncation.
  double omega_cutoff_factor = 1e3;
  /// Delay-integral cutoff: tau_max = factor / (delta_nu * (1 - mu)).
  double tau_cutoff_factor = 20.0;
  int max_levels = 12;  ///< refinement budget for the adaptive schemes

  void validate() const;
};

struct Integral {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
};

/// int_0^inf f(w) cos(w * tau) dw with the full power-law tail included.
/// tau = 0 uses exp-sinh quadrature; tau != 0 uses the Ooura-Mori
/// double-exponential Fourier method. Deterministic for fixed inputs.
Integral fourier_cos_halfline(const std::function<double(double)>& f, double tau,
                              const QuadConfig& cfg = {});

/// Adaptive Gauss-Kronrod on [a, b].
Integral integrate_finite(const std::function<double(double)>& f, double a, double b,
                          const QuadConfig& cfg = {});

/// Throws AccuracyError (never returns a silently wrong answer) when the
/// estimate misses the configured tolerance. `slack` widens the acceptance
/// relative to cfg.rel_tol for error estimates that are themselves noisy.
void require_converged(const Integral& r, const QuadConfig& cfg, const char* what,
                       double slack = 10.0);

}  // namespace polsq
