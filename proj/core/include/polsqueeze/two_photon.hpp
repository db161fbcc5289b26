#pragma once

// Trace-normalized two-photon observable density matrix in the
// (HH, HV, VH, VV) basis and its discrete-variable properties: concurrence
// (two independent methods), maximal CHSH value, partial transposition and
// the classicality inequalities.

#include <array>
#include <complex>
#include <Eigen/Core>

#include "json.hpp"
#include "polsqueeze/opo_model.hpp"

namespace polsq {

using Matrix4cd = Eigen::Matrix<std::complex<double>, 4, 4>;

/// 4x4 Hermitian, trace-one, positive-semidefinite matrix. Builders normalize
/// by the trace and clip eigenvalues in [-1e-10, 0) to zero (renormalizing);
/// anything more negative is rejected as unphysical input rather than noise.
class TwoPhotonODM {
 public:
  /// Assemble the X-patterned matrix from a correlation record and normalize.
  /// Throws ValidationError on a zero trace.
  static TwoPhotonODM from_correlations(const PairCorrelations& corr);

  /// Accept any Hermitian positive matrix (general two-qubit states allowed;
  /// the X pattern is a property of model-built records, not a constraint of
  /// the type). Normalizes by the trace.
  static TwoPhotonODM from_matrix(const Matrix4cd& m, double tau);

  const Matrix4cd& matrix() const { return m_; }
  double tau() const { return tau_; }

  /// True when the eight entries outside the diagonal/anti-diagonal pattern
  /// are exactly zero.
  bool is_x_structured() const;

 private:
  TwoPhotonODM(Matrix4cd m, double tau) : m_(std::move(m)), tau_(tau) {}
  Matrix4cd m_;
  double tau_;
};

static constexpr double kPsdClipTolerance = 1e-10;

struct ConcurrenceResult {
  double eigenvalue_method = 0.0;  ///< from the spin-flipped spectrum (any state)
  double x_state_method = 0.0;     ///< closed form; meaningful when x_structure
  bool x_structure = false;
  std::array<double, 4> lambdas{};  ///< spectrum of rho (sy x sy) rho* (sy x sy), decreasing

  double value() const { return eigenvalue_method; }
};

/// Wootters concurrence. The eigenvalue route evaluates the spectrum of
/// rho (sy x sy) rho* (sy x sy) through the singular values of
/// sqrt(rho) (sy x sy) conj(sqrt(rho)) — identical spectrum, stable near
/// lambda = 0. When the input is X-structured the two methods are asserted
/// equal to 1e-10.
ConcurrenceResult concurrence(const TwoPhotonODM& odm);

struct ChshResult {
  double s_max = 0.0;   ///< 2*sqrt(m1+m2), m_i the two largest eigenvalues of T^T T
  double delta_s = 0.0; ///< s_max - 2, unclamped
};
ChshResult chsh_max(const TwoPhotonODM& odm);

/// Transpose of the second tensor factor.
Matrix4cd partial_transpose(const Matrix4cd& m);

struct PartialTransposeResult {
  Matrix4cd matrix;
  std::array<double, 4> eigenvalues{};  ///< ascending
  double min_eigenvalue = 0.0;
};
PartialTransposeResult partial_transpose(const TwoPhotonODM& odm);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool violated = false;
  double ratio = 0.0;  ///< lhs/rhs; > 1 means the classical bound is broken
};

struct NonclassicalityReport {
  InequalityCheck hhvv;  ///< |R_HHVV|^2 <= R_HVHV * R_VHVH
  InequalityCheck hvvh;  ///< |R_HVVH|^2 <= R_HHHH * R_VVVV
  bool any_violation = false;
  double pt_min_eigenvalue = 0.0;
  bool ppt_negative = false;  ///< agrees with any_violation (asserted)
};

/// Checks the two classicality inequalities on the raw correlation record and
/// the equivalent partial-transposition verdict of the assembled ODM; the two
/// verdicts are asserted to agree (up to a machine-precision boundary band).
NonclassicalityReport nonclassicality_test(const PairCorrelations& corr);

struct EntanglementMetrics {
  double concurrence = 0.0;
  double s_max = 0.0;
  double delta_s = 0.0;
  std::array<double, 4> lambdas{};
};
EntanglementMetrics entanglement_metrics(const TwoPhotonODM& odm);

/// JSON layout: {basis:["HH","HV","VH","VV"], re:4x4, im:4x4, tau_s}.
/// The writer emits exact stored values; the reader validates Hermiticity,
/// unit trace and positivity.
nlohmann::ordered_json odm_to_json(const TwoPhotonODM& odm);
TwoPhotonODM odm_from_json(const nlohmann::json& j);

}  // namespace polsq
