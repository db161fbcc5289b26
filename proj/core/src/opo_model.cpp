#include "polsqueeze/opo_model.hpp"

#include <cmath>
#include <string>

namespace polsq {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}
}  // namespace

OpoParams OpoParams::from_mu(double delta_nu, double eta, double mu, double phi_c) {
  OpoParams p{delta_nu, eta, mu, phi_c};
  p.validate();
  return p;
}

OpoParams OpoParams::from_squeezed_flux(double delta_nu, double eta, double phi_s,
                                        double phi_c) {
  require(phi_s >= 0.0 && std::isfinite(phi_s),
          "phi_s must be finite and >= 0, got " + std::to_string(phi_s));
  OpoParams p{delta_nu, eta, 0.0, phi_c};
  require(delta_nu > 0.0, "delta_nu must be > 0");
  require(eta > 0.0 && eta <= 1.0, "eta must be in (0, 1]");
  p.mu = mu_from_flux(phi_s, eta, delta_nu);
  p.validate();
  return p;
}

void OpoParams::validate() const {
  require(std::isfinite(delta_nu) && delta_nu > 0.0,
          "delta_nu must be finite and > 0, got " + std::to_string(delta_nu));
  require(std::isfinite(eta) && eta > 0.0 && eta <= 1.0,
          "eta must be in (0, 1], got " + std::to_string(eta));
  require(std::isfinite(mu) && mu >= 0.0,
          "mu must be finite and >= 0, got " + std::to_string(mu));
  require(mu < 1.0, "mu = " + std::to_string(mu) +
                        " is at or above the OPO threshold (mu = 1 singularity)");
  require(std::isfinite(phi_c) && phi_c >= 0.0,
          "phi_c must be finite and >= 0, got " + std::to_string(phi_c));
  require(std::isfinite(phi_s()), "derived squeezed flux is not finite");
}

double eta_from_mirrors(double t1, double t2) {
  if (!(t1 > 0.0)) throw ValidationError("output-coupler transmission t1 must be > 0");
  if (!(t2 >= 0.0)) throw ValidationError("intracavity loss t2 must be >= 0");
  return t1 / (t1 + t2);
}

double mu_from_flux(double phi_s, double eta, double delta_nu) {
  if (!(phi_s >= 0.0)) throw ValidationError("phi_s must be >= 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must be in (0, 1]");
  if (!(delta_nu > 0.0)) throw ValidationError("delta_nu must be > 0");
  return std::sqrt(phi_s / (phi_s + eta * delta_nu));
}

OpoParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("parameter record must be a JSON object");
  for (const auto& key : {"delta_nu_hz", "eta", "phi_c"})
    if (!j.contains(key))
      throw ValidationError(std::string("parameter record missing key '") + key + "'");
  const bool has_mu = j.contains("mu");
  const bool has_phi_s = j.contains("phi_s");
  if (has_mu == has_phi_s)
    throw ValidationError("exactly one of 'mu' and 'phi_s' is required");
  const double dnu = j.at("delta_nu_hz").get<double>();
  const double eta = j.at("eta").get<double>();
  const double phi_c = j.at("phi_c").get<double>();
  if (has_mu) return OpoParams::from_mu(dnu, eta, j.at("mu").get<double>(), phi_c);
  return OpoParams::from_squeezed_flux(dnu, eta, j.at("phi_s").get<double>(), phi_c);
}

nlohmann::ordered_json params_to_json(const OpoParams& p) {
  nlohmann::ordered_json j;
  j["delta_nu_hz"] = p.delta_nu;
  j["eta"] = p.eta;
  j["mu"] = p.mu;
  j["phi_s"] = p.phi_s();
  j["phi_c"] = p.phi_c;
  return j;
}

DerivedCoefficients derived_coefficients(const OpoParams& p) {
  p.validate();
  const double mu = p.mu, eta = p.eta, dnu = p.delta_nu;
  const double one_m = 1.0 - mu * mu;
  DerivedCoefficients d;
  d.alpha = eta * mu * dnu / one_m;
  // Printed coefficient, pi*delta_nu taken literally with delta_nu in 1/s.
  // The pi*dnu terms cancel to mu^2 exactly; the remainder is the printed
  // O(1/(pi dnu)) residue.
  const double pd = kPi * dnu;
  d.beta_coeff = (std::pow(mu, 4) * (1.0 - eta - pd) +
                  mu * mu * (pd + 2.0 * eta * (1.0 + eta) - 1.0) +
                  6.0 * eta * eta - 9.0 * eta + 4.0) /
                 (pd * one_m);
  return d;
}

double x_of_tau(const OpoParams& p, double tau) {
  return p.mu * p.delta_nu * std::abs(tau);
}

double BogoliubovCoefficients::normalization() const {
  return std::norm(f1) + std::norm(f3) - std::norm(f2) - std::norm(f4);
}

BogoliubovCoefficients bogoliubov(double omega, const OpoParams& p) {
  p.validate();
  const std::complex<double> z{1.0, -omega / p.delta_nu};  // 1 - i*omega/delta_nu
  const std::complex<double> A = z * z - p.mu * p.mu;
  const double root = std::sqrt(p.eta * (1.0 - p.eta));
  BogoliubovCoefficients b;
  b.a_denom = A;
  b.f1 = (p.eta * p.eta - (z - p.eta) * (z - p.eta) + p.mu * p.mu) / A;
  b.f2 = 2.0 * p.eta * p.mu / A;
  b.f3 = 2.0 * root * z / A;
  b.f4 = 2.0 * p.mu * root / A;
  return b;
}

const char* to_string(VvvvVariant v) {
  return v == VvvvVariant::gaussian ? "gaussian" : "printed";
}

VvvvVariant vvvv_variant_from_string(std::string_view s) {
  if (s == "gaussian") return VvvvVariant::gaussian;
  if (s == "printed") return VvvvVariant::printed;
  throw ValidationError("unknown R_VVVV variant '" + std::string(s) +
                        "' (expected 'gaussian' or 'printed')");
}

double r_vvvv_closed(double tau, const OpoParams& p, VvvvVariant variant) {
  const auto d = derived_coefficients(p);
  const double x = x_of_tau(p, tau);
  const double mu2 = p.mu * p.mu;
  const double decay2 = std::exp(-2.0 * p.delta_nu * std::abs(tau));
  if (variant == VvvvVariant::printed) {
    return d.alpha * d.alpha *
           (d.beta_coeff +
            ((1.0 - mu2) * std::cosh(2.0 * x) + 2.0 * p.mu * std::sinh(2.0 * x)) * decay2);
  }
  // Gaussian-moment form: n(0)^2 + n(tau)^2 + m(tau)^2 collapsed to one bracket.
  return d.alpha * d.alpha *
         (mu2 + ((1.0 + mu2) * std::cosh(2.0 * x) + 2.0 * p.mu * std::sinh(2.0 * x)) * decay2);
}

PairCorrelations pair_correlations(double tau, const OpoParams& p, VvvvVariant variant) {
  const auto d = derived_coefficients(p);
  const double x = x_of_tau(p, tau);
  const double decay = std::exp(-p.delta_nu * std::abs(tau));
  PairCorrelations c;
  c.tau = tau;
  c.vvvv_variant = variant;
  c.r_hhhh = p.phi_c * p.phi_c;
  c.r_hvhv = p.phi_c * d.alpha * p.mu;  // = Phi_C * Phi_S, independent of tau
  c.r_vhvh = c.r_hvhv;                  // mode-exchange symmetry under stationarity
  c.r_hhvv = p.phi_c * d.alpha * (std::cosh(x) + p.mu * std::sinh(x)) * decay;
  c.r_hvvh = p.phi_c * d.alpha * (p.mu * std::cosh(x) + std::sinh(x)) * decay;
  c.r_vvvv = r_vvvv_closed(tau, p, variant);
  return c;
}

Eigen::Matrix2d first_order(const OpoParams& p) {
  p.validate();
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  m(0, 0) = p.phi_c;
  m(1, 1) = p.phi_s();
  return m;
}

}  // namespace polsq
