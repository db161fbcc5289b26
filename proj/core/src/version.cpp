#include "polsqueeze/version.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>

namespace polsq {

namespace {

constexpr std::string_view kLedger =
    "delta_nu: cavity FWHM bandwidth used literally as a rate in 1/s, with no 2*pi factor,\n"
    "  both in Phi_S = mu^2*eta*delta_nu/(1-mu^2) and in the exp(-delta_nu*|tau|) decay.\n"
    "pump phase: fixed to 0; all correlation elements are real.\n"
    "basis order: (HH, HV, VH, VV).\n"
    "R_VVVV variants: 'gaussian' (default) = alpha^2*{mu^2 + [(1+mu^2)cosh(2x)\n"
    "  + 2*mu*sinh(2x)]*exp(-2*delta_nu*|tau|)}, the Wick-consistent closed form;\n"
    "  'printed' = the printed-coefficient variant with beta evaluated with\n"
    "  delta_nu in 1/s. Both are computed and compared in oracle-check reports.\n"
    "Fourier convention: n(tau) = int dw/(2pi) e^{i w tau} N(w) with\n"
    "  N = |f2|^2+|f4|^2 and M(w) = f1(w)f2(-w)+f3(w)f4(-w); normalized so n(0) = Phi_S.\n"
    "CHSH: S_max = 2*sqrt(m1+m2) from the two largest eigenvalues of T^T T;\n"
    "  delta_s reported unclamped, the beta figure of merit clamps at 0 and uses the\n"
    "  tau = 0 observable density matrix.\n";

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string_view convention_ledger() { return kLedger; }

std::string convention_ledger_hash() {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(kLedger)));
  return std::string(buf);
}

Provenance make_provenance(bool with_timestamp) {
  Provenance p;
  p.engine_version = std::string(kEngineVersion);
  p.convention_hash = convention_ledger_hash();
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%FT%TZ", &tm);
    p.timestamp = buf;
  }
  return p;
}

}  // namespace polsq
