#include "polsqueeze/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>
#include <string>

namespace polsq {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

void QuadConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw ValidationError("quad rel_tol must be in (0, 1)");
  if (!(abs_tol >= 0.0)) throw ValidationError("quad abs_tol must be >= 0");
  if (!(omega_cutoff_factor > 0.0))
    throw ValidationError("quad omega_cutoff_factor must be > 0");
  if (!(tau_cutoff_factor > 0.0))
    throw ValidationError("quad tau_cutoff_factor must be > 0");
  if (max_levels < 1) throw ValidationError("quad max_levels must be >= 1");
}

Integral fourier_cos_halfline(const std::function<double(double)>& f, double tau,
                              const QuadConfig& cfg) {
  cfg.validate();
  const double t = std::abs(tau);
  if (t == 0.0) {
    boost::math::quadrature::exp_sinh<double> integrator(
        static_cast<size_t>(cfg.max_levels));
    double err = 0.0, l1 = 0.0;
    const double v = integrator.integrate(f, cfg.rel_tol, &err, &l1);
    return {v, std::abs(err)};
  }
  try {
    // A fresh integrator per call keeps results independent of call history
    // (integrate() mutates an internal starting-level hint). Eager node
    // tables are capped at 4 levels since their build cost grows as 2^level;
    // integrate() extends lazily by up to 4 more when an integrand needs it.
    const auto levels = std::min<std::size_t>(
        static_cast<std::size_t>(cfg.max_levels), 4);
    boost::math::quadrature::ooura_fourier_cos<double> integrator(cfg.rel_tol,
                                                                  levels);
    const auto [v, rel_err] = integrator.integrate(f, t);
    return {v, std::abs(v) * std::abs(rel_err)};
  } catch (const AccuracyError&) {
    throw;
  } catch (const std::runtime_error& e) {
    // boost reports refinement exhaustion via evaluation_error
    throw AccuracyError(std::string("fourier_cos_halfline: ") + e.what());
  }
}

Integral integrate_finite(const std::function<double(double)>& f, double a, double b,
                          const QuadConfig& cfg) {
  cfg.validate();
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, cfg.max_levels, cfg.rel_tol, &err);
  return {v, std::abs(err)};
}

void require_converged(const Integral& r, const QuadConfig& cfg, const char* what,
                       double slack) {
  const double bound = std::max(cfg.abs_tol, std::abs(r.value) * cfg.rel_tol * slack);
  if (!std::isfinite(r.value) || !(r.error <= bound)) {
    char msg[192];
    std::snprintf(msg, sizeof msg,
                  "%s: quadrature did not converge (value=%.6e, err=%.3e, bound=%.3e)",
                  what, r.value, r.error, bound);
    throw AccuracyError(msg);
  }
}

}  // namespace polsq
