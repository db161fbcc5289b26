#include "polsqueeze/metrics.hpp"

#include <cmath>
#include <cstring>

#include "doctest.h"
#include "polsqueeze/two_photon.hpp"

using namespace polsq;

namespace {
const OpoParams kTypical = OpoParams::from_squeezed_flux(8e6, 0.93, 2e5, 2e6);
}

TEST_CASE("concurrence flux at the typical operating point") {
  const auto w2 = concurrence_flux(kTypical);
  // frozen from an independent quadrature of the same closed forms
  CHECK(w2.value == doctest::Approx(6.9932e5).epsilon(1e-3));
  CHECK(w2.error < 0.01 * w2.value);
  CHECK(w2.error >= 0.0);
}

TEST_CASE("concurrence flux vanishes without squeezing or without carrier") {
  CHECK(concurrence_flux(OpoParams::from_mu(8e6, 0.93, 0.0, 2e6)).value == 0.0);
  // no coherent beam: corner coherences vanish, C == 0 along the whole grid
  const auto p = OpoParams::from_squeezed_flux(8e6, 0.93, 2e5, 0.0);
  for (double tau : {0.0, 1e-9, 1e-8, 1e-7}) {
    const auto corr = pair_correlations(tau, p);
    CHECK(concurrence(TwoPhotonODM::from_correlations(corr)).value() == 0.0);
  }
  CHECK(concurrence_flux(p).value == 0.0);
}

TEST_CASE("w2 evenness: full line equals twice the half line") {
  QuadConfig cfg;
  const double tau_max =
      cfg.tau_cutoff_factor / (kTypical.delta_nu * (1.0 - kTypical.mu));
  auto integrand = [&](double tau) {
    const auto corr = pair_correlations(tau, kTypical);
    return corr.trace() *
           concurrence(TwoPhotonODM::from_correlations(corr)).value();
  };
  const auto full = integrate_finite(integrand, -tau_max, tau_max, cfg);
  const auto half = integrate_finite(integrand, 0.0, tau_max, cfg);
  CHECK(full.value ==
        doctest::Approx(2.0 * half.value).epsilon(1e-7));
}

TEST_CASE("w2 additivity bound: C <= 1 caps the flux integral") {
  QuadConfig cfg;
  const double tau_max =
      cfg.tau_cutoff_factor / (kTypical.delta_nu * (1.0 - kTypical.mu));
  auto trace_only = [&](double tau) {
    return pair_correlations(tau, kTypical).trace();
  };
  const auto cap = integrate_finite(trace_only, 0.0, tau_max, cfg);
  CHECK(concurrence_flux(kTypical).value <= 2.0 * cap.value);
}

TEST_CASE("pair rate within the coincidence window") {
  const auto corr0 = pair_correlations(0.0, kTypical);
  CHECK(pair_rate(kTypical, 1e-9) ==
        doctest::Approx(corr0.trace() * 1e-9).epsilon(1e-14));
  // Tr[R(0)] decomposes into its diagonal pieces
  const double expected = kTypical.phi_c * kTypical.phi_c +
                          2.0 * kTypical.phi_c * kTypical.phi_s() +
                          corr0.r_vvvv;
  CHECK(corr0.trace() == doctest::Approx(expected).epsilon(1e-12));

  CHECK(pair_rate(OpoParams::from_mu(8e6, 0.93, 0.0, 2e6), 1e-9) ==
        doctest::Approx(4e12 * 1e-9));
  CHECK(pair_rate(kTypical, 0.0) == 0.0);
  CHECK_THROWS_AS(pair_rate(kTypical, -1e-9), ValidationError);

  CHECK(coincidence_window_ok(kTypical, 1e-9));
  CHECK_FALSE(coincidence_window_ok(kTypical, 1e-7));
}

TEST_CASE("bell figure of merit: clamping and route equality") {
  CHECK(bell_fom(OpoParams::from_mu(8e6, 0.93, 0.0, 2e6), 1e-9) == 0.0);

  const auto corr0 = pair_correlations(0.0, kTypical);
  const double ds =
      chsh_max(TwoPhotonODM::from_correlations(corr0)).delta_s;
  const double expected = std::max(0.0, ds) * std::max(0.0, ds) *
                          pair_rate(kTypical, 1e-9);
  CHECK(bell_fom(kTypical, 1e-9) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(bell_fom(kTypical, 1e-9) > 0.0);

  // strongly diluted point: s_max <= 2, so beta clamps to exactly zero
  const auto diluted = OpoParams::from_squeezed_flux(8e6, 0.93, 2e5, 1e10);
  const double s =
      chsh_max(TwoPhotonODM::from_correlations(pair_correlations(0.0, diluted)))
          .s_max;
  CHECK(s <= 2.0);
  CHECK(bell_fom(diluted, 1e-9) == 0.0);

  // tau-resolved variant evaluates away from zero delay
  CHECK(bell_fom_at(0.0, kTypical, 1e-9) == bell_fom(kTypical, 1e-9));
  CHECK(bell_fom_at(1e-6, kTypical, 1e-9) == 0.0);
}

TEST_CASE("pairs-to-singles ratio") {
  CHECK(pairs_to_singles(kTypical) == doctest::Approx(0.3179).epsilon(2e-3));
  CHECK(pairs_to_singles(OpoParams::from_mu(8e6, 0.93, 0.0, 2e6)) == 0.0);
  CHECK_THROWS_AS(pairs_to_singles(OpoParams::from_mu(8e6, 0.93, 0.0, 0.0)),
                  ValidationError);
}

TEST_CASE("spectral brightness") {
  CHECK(spectral_brightness(kTypical) ==
        doctest::Approx(6.9932e5 / 8.0).epsilon(2e-3));
  CHECK(spectral_brightness(OpoParams::from_mu(8e6, 0.93, 0.0, 2e6)) == 0.0);
}

TEST_CASE("flux metrics bundle is bitwise reproducible") {
  const auto a = flux_metrics(kTypical, 1e-9);
  const auto b = flux_metrics(kTypical, 1e-9);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);

  CHECK(a.w2 > 0.0);
  CHECK(a.r_ps == doctest::Approx(a.w2 / (kTypical.phi_s() + kTypical.phi_c)));
  CHECK(a.spectral_brightness ==
        doctest::Approx(a.w2 / (kTypical.delta_nu / 1e6)));
  CHECK(a.beta_fom >= 0.0);

  const auto j = metrics_to_json(a, kTypical);
  CHECK(j.at("delta_nu_mhz") == doctest::Approx(8.0));
  CHECK(j.at("w2_ebit_per_s") == a.w2);
}
