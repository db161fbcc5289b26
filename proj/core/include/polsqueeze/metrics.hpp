#pragma once

// Scalar figures of merit for one operating point: concurrence flux W2,
// coincidence rate within a window, the Bell figure of merit
// beta = max(0, dS)^2 * Phi_dtau, the pairs-to-singles ratio and the
// spectral brightness.

#include "json.hpp"
#include "polsqueeze/opo_model.hpp"
#include "polsqueeze/quadrature.hpp"

namespace polsq {

struct W2Result {
  double value = 0.0;  ///< ebit/s (the concurrence-weighted pair flux)
  double error = 0.0;  ///< quadrature error estimate (absolute)
};

/// W2 = int dtau Tr[R(tau)] C(tau), evaluated as 2 * int_0^tau_max by
/// evenness with tau_max = tau_cutoff_factor / (delta_nu (1 - mu)); the
/// exponential tail bound beyond the cutoff is folded into the error.
W2Result concurrence_flux(const OpoParams& p, const QuadConfig& cfg = {},
                          VvvvVariant variant = VvvvVariant::gaussian);

/// Phi_dtau = Tr[R(0)] * delta_tau (coincidence-window detection rate).
/// Meaningful for delta_tau << 1/delta_nu; callers should warn when
/// delta_tau * delta_nu > 0.1 (see coincidence_window_ok).
double pair_rate(const OpoParams& p, double delta_tau,
                 VvvvVariant variant = VvvvVariant::gaussian);

bool coincidence_window_ok(const OpoParams& p, double delta_tau);

/// beta = max(0, delta_s)^2 * Phi_dtau with the ODM taken at tau = 0
/// (the coincidence-window limit); tau-resolved evaluation available via
/// bell_fom_at.
double bell_fom(const OpoParams& p, double delta_tau,
                VvvvVariant variant = VvvvVariant::gaussian);
double bell_fom_at(double tau, const OpoParams& p, double delta_tau,
                   VvvvVariant variant = VvvvVariant::gaussian);

/// R_P/S = W2 / (Phi_S + Phi_C). Throws ValidationError on zero total flux.
double pairs_to_singles(const OpoParams& p, const QuadConfig& cfg = {},
                        VvvvVariant variant = VvvvVariant::gaussian);

/// W2 per bandwidth, pairs/(s*MHz).
double spectral_brightness(const OpoParams& p, const QuadConfig& cfg = {},
                           VvvvVariant variant = VvvvVariant::gaussian);

struct FluxMetrics {
  double w2 = 0.0;
  double pair_rate = 0.0;
  double beta_fom = 0.0;
  double r_ps = 0.0;
  double spectral_brightness = 0.0;
  double integ_error = 0.0;  ///< error estimate on w2
};

/// One-shot evaluation sharing a single W2 quadrature.
FluxMetrics flux_metrics(const OpoParams& p, double delta_tau,
                         const QuadConfig& cfg = {},
                         VvvvVariant variant = VvvvVariant::gaussian);

/// Flat object; rates in 1/s, bandwidth echoed in both 1/s and MHz.
nlohmann::ordered_json metrics_to_json(const FluxMetrics& m, const OpoParams& p);

}  // namespace polsq
