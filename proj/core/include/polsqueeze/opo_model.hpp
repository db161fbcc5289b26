#pragma once

// Source parameters of the polarization-squeezed beam (coherent H mode +
// sub-threshold OPO squeezed vacuum in V) and the closed-form first/second
// order polarization correlation functions.

#include <complex>
#include <Eigen/Core>

#include "json.hpp"
#include "polsqueeze/errors.hpp"

namespace polsq {

/// Physical configuration of the source. Canonical form stores the pump
/// fraction mu; construct from either mu or the squeezed flux Phi_S.
struct OpoParams {
  double delta_nu = 0.0;  ///< cavity FWHM bandwidth, 1/s (used literally, no 2*pi)
  double eta = 1.0;       ///< cavity escape coefficient, (0, 1]
  double mu = 0.0;        ///< sqrt of pump power as fraction of threshold, [0, 1)
  double phi_c = 0.0;     ///< coherent-beam photon flux, photons/s

  static OpoParams from_mu(double delta_nu, double eta, double mu, double phi_c);
  static OpoParams from_squeezed_flux(double delta_nu, double eta, double phi_s,
                                      double phi_c);

  /// Squeezed-vacuum photon flux Phi_S = mu^2 * eta * delta_nu / (1 - mu^2).
  double phi_s() const { return mu * mu * eta * delta_nu / (1.0 - mu * mu); }

  /// Throws ValidationError on any domain violation (mu = 1 is the OPO
  /// threshold singularity and is rejected here, so downstream evaluators
  /// never see it).
  void validate() const;
};

/// Escape coefficient eta = t1 / (t1 + t2) from output-coupler transmission
/// t1 and intracavity loss t2.
double eta_from_mirrors(double t1, double t2);

/// Inverts Phi_S = mu^2 eta delta_nu / (1 - mu^2):
/// mu = sqrt(Phi_S / (Phi_S + eta delta_nu)).
double mu_from_flux(double phi_s, double eta, double delta_nu);

/// JSON object with keys delta_nu_hz, eta, phi_c and exactly one of mu/phi_s.
OpoParams params_from_json(const nlohmann::json& j);
nlohmann::ordered_json params_to_json(const OpoParams& p);

struct DerivedCoefficients {
  double alpha;       ///< eta*mu*delta_nu/(1-mu^2), photons/s; alpha*mu == Phi_S
  double beta_coeff;  ///< the printed R_VVVV coefficient, delta_nu taken in 1/s
};
DerivedCoefficients derived_coefficients(const OpoParams& p);

/// x = mu * delta_nu * |tau| (dimensionless, even in tau).
double x_of_tau(const OpoParams& p, double tau);

/// Output-field Bogoliubov amplitudes at sideband frequency omega, relating
/// the squeezed output mode to the two vacuum reservoirs.
struct BogoliubovCoefficients {
  std::complex<double> f1, f2, f3, f4;
  std::complex<double> a_denom;  ///< A(omega) = (1 - i*omega/delta_nu)^2 - mu^2

  /// |f1|^2 + |f3|^2 - |f2|^2 - |f4|^2; equals 1 for every omega
  /// (commutator preservation).
  double normalization() const;
};
BogoliubovCoefficients bogoliubov(double omega, const OpoParams& p);

/// Which closed form supplies R_VVVV. 'gaussian' is the Wick-consistent
/// expression alpha^2*{mu^2 + [(1+mu^2)cosh 2x + 2 mu sinh 2x] e^{-2 dnu |tau|}}
/// and is the pipeline default; 'printed' is the printed-coefficient variant with
/// the beta coefficient. oracle-check reports compare both against the
/// numerical Gaussian-moment oracle.
enum class VvvvVariant { gaussian, printed };

const char* to_string(VvvvVariant v);
VvvvVariant vvvv_variant_from_string(std::string_view s);

/// Second-order correlation elements at delay tau. For pump phase 0 every
/// element is real and >= 0; conjugate partners are exposed as accessors.
struct PairCorrelations {
  double tau = 0.0;
  double r_hhhh = 0.0;
  double r_hvhv = 0.0;
  double r_vhvh = 0.0;
  double r_hhvv = 0.0;
  double r_hvvh = 0.0;
  double r_vvvv = 0.0;
  VvvvVariant vvvv_variant = VvvvVariant::gaussian;

  double r_vvhh() const { return r_hhvv; }  // conj partner, real at phase 0
  double r_vhhv() const { return r_hvvh; }
  double trace() const { return r_hhhh + r_hvhv + r_vhvh + r_vvvv; }
};

PairCorrelations pair_correlations(double tau, const OpoParams& p,
                                   VvvvVariant variant = VvvvVariant::gaussian);

/// Just the R_VVVV element in the requested closed form.
double r_vvvv_closed(double tau, const OpoParams& p, VvvvVariant variant);

/// One-photon correlation matrix at tau = 0: diag(Phi_C, Phi_S) in the
/// (H, V) basis; off-diagonals vanish by the pi_V symmetry.
Eigen::Matrix2d first_order(const OpoParams& p);

}  // namespace polsq
