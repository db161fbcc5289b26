#include "polsqueeze/two_photon.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace polsq {

namespace {

// sigma_y x sigma_y in the (HH, HV, VH, VV) basis: the spin-flip kernel of
// the concurrence.
Matrix4cd spin_flip() {
  Matrix4cd s = Matrix4cd::Zero();
  s(0, 3) = -1.0;
  s(1, 2) = 1.0;
  s(2, 1) = 1.0;
  s(3, 0) = -1.0;
  return s;
}

Matrix4cd hermitian_sqrt(const Matrix4cd& m) {
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(m);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

// Normalize, then clip tiny negative eigenvalues (renormalizing) or reject.
Matrix4cd sanitize(Matrix4cd m, const char* origin) {
  const double tr = m.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw ValidationError(std::string(origin) + ": matrix trace must be positive");
  m /= tr;
  const double herm_dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > 1e-12)
    throw ValidationError(std::string(origin) +
                          ": matrix is not Hermitian (max deviation " +
                          std::to_string(herm_dev) + ")");
  m = 0.5 * (m + m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(m);
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -kPsdClipTolerance)
    throw ValidationError(std::string(origin) + ": eigenvalue " +
                          std::to_string(min_ev) +
                          " below the PSD tolerance -1e-10; refusing to clip");
  if (min_ev < 0.0) {
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    m /= m.trace().real();
  }
  return m;
}

}  // namespace

TwoPhotonODM TwoPhotonODM::from_correlations(const PairCorrelations& corr) {
  const double tr = corr.trace();
  if (!(tr > 0.0))
    throw ValidationError("build_odm: degenerate input, correlation trace is zero");
  Matrix4cd m = Matrix4cd::Zero();
  m(0, 0) = corr.r_hhhh;
  m(1, 1) = corr.r_hvhv;
  m(2, 2) = corr.r_vhvh;
  m(3, 3) = corr.r_vvvv;
  m(0, 3) = corr.r_hhvv;
  m(3, 0) = corr.r_vvhh();
  m(1, 2) = corr.r_hvvh;
  m(2, 1) = corr.r_vhhv();
  m /= tr;
  // Hermitian by construction (conjugate partners); PSD holds for model
  // records, so reject rather than clip if a caller feeds junk.
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(m);
  if (es.eigenvalues().minCoeff() < -kPsdClipTolerance)
    throw ValidationError("build_odm: correlation record is not positive "
                          "semidefinite (min eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()) + ")");
  return TwoPhotonODM(m, corr.tau);
}

TwoPhotonODM TwoPhotonODM::from_matrix(const Matrix4cd& m, double tau) {
  return TwoPhotonODM(sanitize(m, "TwoPhotonODM"), tau);
}

bool TwoPhotonODM::is_x_structured() const {
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const bool x_slot = (r == c) || (r + c == 3);
      if (!x_slot && m_(r, c) != 0.0) return false;
    }
  return true;
}

ConcurrenceResult concurrence(const TwoPhotonODM& odm) {
  const Matrix4cd& rho = odm.matrix();
  ConcurrenceResult res;
  res.x_structure = odm.is_x_structured();

  // sqrt(lambda_i) of rho S rho* S are the singular values of
  // B = sqrt(rho) S conj(sqrt(rho)): rho S rho* S is similar to B B^dagger.
  const Matrix4cd root = hermitian_sqrt(rho);
  const Matrix4cd b = root * spin_flip() * root.conjugate();
  Eigen::JacobiSVD<Matrix4cd> svd(b);
  Eigen::Vector4d s = svd.singularValues();  // decreasing
  res.lambdas = {s(0) * s(0), s(1) * s(1), s(2) * s(2), s(3) * s(3)};
  res.eigenvalue_method = std::max(0.0, s(0) - s(1) - s(2) - s(3));

  if (res.x_structure) {
    const double outer = std::abs(rho(0, 3)) -
                         std::sqrt(std::abs(rho(1, 1).real() * rho(2, 2).real()));
    const double inner = std::abs(rho(1, 2)) -
                         std::sqrt(std::abs(rho(0, 0).real() * rho(3, 3).real()));
    res.x_state_method = 2.0 * std::max({0.0, outer, inner});
    if (std::abs(res.x_state_method - res.eigenvalue_method) > 1e-10)
      throw AccuracyError(
          "concurrence: eigenvalue and X-state methods disagree beyond 1e-10 (" +
          std::to_string(res.eigenvalue_method) + " vs " +
          std::to_string(res.x_state_method) + ")");
  } else {
    res.x_state_method = res.eigenvalue_method;
  }
  return res;
}

ChshResult chsh_max(const TwoPhotonODM& odm) {
  const Matrix4cd& rho = odm.matrix();
  Eigen::Matrix2cd pauli[3];
  pauli[0] << 0, 1, 1, 0;
  pauli[1] << std::complex<double>(0, 0), std::complex<double>(0, -1),
      std::complex<double>(0, 1), std::complex<double>(0, 0);
  pauli[2] << 1, 0, 0, -1;

  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Matrix4cd op = Matrix4cd::Zero();
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d)
              op(2 * a + b, 2 * c + d) = pauli[i](a, c) * pauli[j](b, d);
      t(i, j) = (rho * op).trace().real();
    }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.transpose() * t);
  const auto& m = es.eigenvalues();  // ascending
  ChshResult r;
  r.s_max = 2.0 * std::sqrt(std::max(0.0, m(1) + m(2)));
  r.delta_s = r.s_max - 2.0;
  return r;
}

Matrix4cd partial_transpose(const Matrix4cd& m) {
  Matrix4cd out;
  for (int i1 = 0; i1 < 2; ++i1)
    for (int i2 = 0; i2 < 2; ++i2)
      for (int j1 = 0; j1 < 2; ++j1)
        for (int j2 = 0; j2 < 2; ++j2)
          out(2 * i1 + j2, 2 * j1 + i2) = m(2 * i1 + i2, 2 * j1 + j2);
  return out;
}

PartialTransposeResult partial_transpose(const TwoPhotonODM& odm) {
  PartialTransposeResult r;
  r.matrix = partial_transpose(odm.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(r.matrix);
  for (int i = 0; i < 4; ++i) r.eigenvalues[i] = es.eigenvalues()(i);
  r.min_eigenvalue = r.eigenvalues[0];
  return r;
}

namespace {
InequalityCheck check_inequality(double corr_sq, double bound) {
  InequalityCheck c;
  c.lhs = corr_sq;
  c.rhs = bound;
  c.violated = corr_sq > bound;
  if (bound > 0.0)
    c.ratio = corr_sq / bound;
  else
    c.ratio = corr_sq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return c;
}
}  // namespace

NonclassicalityReport nonclassicality_test(const PairCorrelations& corr) {
  NonclassicalityReport rep;
  rep.hhvv = check_inequality(corr.r_hhvv * corr.r_hhvv, corr.r_hvhv * corr.r_vhvh);
  rep.hvvh = check_inequality(corr.r_hvvh * corr.r_hvvh, corr.r_hhhh * corr.r_vvvv);
  rep.any_violation = rep.hhvv.violated || rep.hvvh.violated;

  const auto pt = partial_transpose(TwoPhotonODM::from_correlations(corr));
  rep.pt_min_eigenvalue = pt.min_eigenvalue;
  rep.ppt_negative = pt.min_eigenvalue < 0.0;

  if (rep.ppt_negative != rep.any_violation) {
    // The two verdicts are algebraically identical for X-structured records;
    // a disagreement is tolerable only in the rounding band around the
    // separability boundary.
    const double near_boundary_ratio =
        std::max(std::abs(rep.hhvv.ratio - 1.0), std::abs(rep.hvvh.ratio - 1.0));
    const bool boundary = std::abs(rep.pt_min_eigenvalue) < 1e-12 &&
                          (rep.hhvv.ratio <= 1.0 + 1e-9 && rep.hvvh.ratio <= 1.0 + 1e-9);
    if (!boundary)
      throw AccuracyError(
          "nonclassicality_test: inequality and partial-transpose verdicts "
          "disagree away from the boundary (pt_min=" +
          std::to_string(rep.pt_min_eigenvalue) +
          ", max ratio dev=" + std::to_string(near_boundary_ratio) + ")");
  }
  return rep;
}

EntanglementMetrics entanglement_metrics(const TwoPhotonODM& odm) {
  EntanglementMetrics m;
  const auto c = concurrence(odm);
  const auto s = chsh_max(odm);
  m.concurrence = c.value();
  m.s_max = s.s_max;
  m.delta_s = s.delta_s;
  m.lambdas = c.lambdas;
  return m;
}

nlohmann::ordered_json odm_to_json(const TwoPhotonODM& odm) {
  nlohmann::ordered_json j;
  j["basis"] = {"HH", "HV", "VH", "VV"};
  nlohmann::ordered_json re = nlohmann::ordered_json::array();
  nlohmann::ordered_json im = nlohmann::ordered_json::array();
  for (int r = 0; r < 4; ++r) {
    nlohmann::ordered_json re_row = nlohmann::ordered_json::array();
    nlohmann::ordered_json im_row = nlohmann::ordered_json::array();
    for (int c = 0; c < 4; ++c) {
      re_row.push_back(odm.matrix()(r, c).real());
      im_row.push_back(odm.matrix()(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  j["tau_s"] = odm.tau();
  return j;
}

TwoPhotonODM odm_from_json(const nlohmann::json& j) {
  for (const auto& key : {"basis", "re", "im", "tau_s"})
    if (!j.contains(key))
      throw ValidationError(std::string("ODM record missing key '") + key + "'");
  const auto basis = j.at("basis");
  const nlohmann::json expected = {"HH", "HV", "VH", "VV"};
  if (basis != expected)
    throw ValidationError("ODM basis must be [\"HH\",\"HV\",\"VH\",\"VV\"]");
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (re.size() != 4 || im.size() != 4)
    throw ValidationError("ODM re/im must be 4x4 arrays");
  Matrix4cd m;
  for (int r = 0; r < 4; ++r) {
    if (re.at(r).size() != 4 || im.at(r).size() != 4)
      throw ValidationError("ODM re/im must be 4x4 arrays");
    for (int c = 0; c < 4; ++c)
      m(r, c) = std::complex<double>(re.at(r).at(c).get<double>(),
                                     im.at(r).at(c).get<double>());
  }
  const double tr_dev = std::abs(m.trace().real() - 1.0);
  if (tr_dev > 1e-12)
    throw ValidationError("stored ODM trace deviates from 1 by " +
                          std::to_string(tr_dev));
  return TwoPhotonODM::from_matrix(m, j.at("tau_s").get<double>());
}

}  // namespace polsq
