#include "polsqueeze/metrics.hpp"

#include <cmath>
#include <vector>

#include "polsqueeze/two_photon.hpp"

namespace polsq {

namespace {

// Tr[R(tau)] * C(tau); zero when no pairs arrive at all.
double w2_integrand(double tau, const OpoParams& p, VvvvVariant variant) {
  const PairCorrelations corr = pair_correlations(tau, p, variant);
  const double tr = corr.trace();
  if (tr <= 0.0) return 0.0;
  const auto odm = TwoPhotonODM::from_correlations(corr);
  return tr * concurrence(odm).value();
}

}  // namespace

W2Result concurrence_flux(const OpoParams& p, const QuadConfig& cfg,
                          VvvvVariant variant) {
  p.validate();
  cfg.validate();
  if (p.mu == 0.0 || p.phi_c == 0.0) {
    // no squeezing or no coherent beam: corner coherences vanish and C == 0
    return {0.0, 0.0};
  }
  const double tau_max = cfg.tau_cutoff_factor / (p.delta_nu * (1.0 - p.mu));
  auto f = [&](double tau) { return w2_integrand(tau, p, variant); };

  // The concurrence clamp puts a derivative kink where C reaches zero, which
  // wrecks the Gauss-Kronrod error estimate. Locate the zero crossings on a
  // coarse scan, pin them by bisection, and integrate the smooth pieces.
  std::vector<double> cuts{0.0};
  const int scan = 64;
  double prev_t = 0.0;
  bool prev_pos = f(0.0) > 0.0;
  for (int i = 1; i <= scan; ++i) {
    const double t = tau_max * i / scan;
    const bool pos = f(t) > 0.0;
    if (pos != prev_pos) {
      double lo = prev_t, hi = t;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((f(mid) > 0.0) == prev_pos ? lo : hi) = mid;
      }
      cuts.push_back(0.5 * (lo + hi));
      prev_pos = pos;
    }
    prev_t = t;
  }
  cuts.push_back(tau_max);

  Integral half{0.0, 0.0};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const Integral piece = integrate_finite(f, cuts[k], cuts[k + 1], cfg);
    half.value += piece.value;
    half.error += piece.error;
  }
  require_converged(half, cfg, "concurrence_flux");
  // integrand decays at least as exp(-delta_nu (1-mu) tau) past the cutoff
  const double tail = f(tau_max) / (p.delta_nu * (1.0 - p.mu));
  return {2.0 * half.value, 2.0 * (half.error + tail)};
}

double pair_rate(const OpoParams& p, double delta_tau, VvvvVariant variant) {
  p.validate();
  if (!(delta_tau >= 0.0))
    throw ValidationError("coincidence window delta_tau must be >= 0");
  return pair_correlations(0.0, p, variant).trace() * delta_tau;
}

bool coincidence_window_ok(const OpoParams& p, double delta_tau) {
  return delta_tau * p.delta_nu <= 0.1;
}

double bell_fom_at(double tau, const OpoParams& p, double delta_tau,
                   VvvvVariant variant) {
  const double rate = pair_rate(p, delta_tau, variant);
  const PairCorrelations corr = pair_correlations(tau, p, variant);
  if (corr.trace() <= 0.0) return 0.0;
  const auto odm = TwoPhotonODM::from_correlations(corr);
  const double ds = chsh_max(odm).delta_s;
  return ds > 0.0 ? ds * ds * rate : 0.0;
}

double bell_fom(const OpoParams& p, double delta_tau, VvvvVariant variant) {
  return bell_fom_at(0.0, p, delta_tau, variant);
}

double pairs_to_singles(const OpoParams& p, const QuadConfig& cfg,
                        VvvvVariant variant) {
  p.validate();
  const double total = p.phi_s() + p.phi_c;
  if (!(total > 0.0))
    throw ValidationError("pairs_to_singles: total flux Phi_S + Phi_C is zero");
  return concurrence_flux(p, cfg, variant).value / total;
}

double spectral_brightness(const OpoParams& p, const QuadConfig& cfg,
                           VvvvVariant variant) {
  return concurrence_flux(p, cfg, variant).value / (p.delta_nu / 1e6);
}

FluxMetrics flux_metrics(const OpoParams& p, double delta_tau, const QuadConfig& cfg,
                         VvvvVariant variant) {
  const W2Result w2 = concurrence_flux(p, cfg, variant);
  FluxMetrics m;
  m.w2 = w2.value;
  m.integ_error = w2.error;
  m.pair_rate = pair_rate(p, delta_tau, variant);
  m.beta_fom = bell_fom(p, delta_tau, variant);
  const double total = p.phi_s() + p.phi_c;
  m.r_ps = total > 0.0 ? w2.value / total : 0.0;
  m.spectral_brightness = w2.value / (p.delta_nu / 1e6);
  return m;
}

nlohmann::ordered_json metrics_to_json(const FluxMetrics& m, const OpoParams& p) {
  nlohmann::ordered_json j;
  j["w2_ebit_per_s"] = m.w2;
  j["w2_integ_error"] = m.integ_error;
  j["pair_rate_per_s"] = m.pair_rate;
  j["beta_fom_per_s"] = m.beta_fom;
  j["r_ps"] = m.r_ps;
  j["spectral_brightness_per_s_mhz"] = m.spectral_brightness;
  j["delta_nu_hz"] = p.delta_nu;
  j["delta_nu_mhz"] = p.delta_nu / 1e6;
  return j;
}

}  // namespace polsq
