#pragma once

#include <string>
#include <string_view>

namespace polsq {

inline constexpr std::string_view kEngineVersion = "0.1.0";

/// Plain-text summary of the numerical conventions this engine is built on
/// (bandwidth units, pump phase, basis order, Fourier normalization,
/// R_VVVV variant selection). Mirrored in docs/conventions.md.
std::string_view convention_ledger();

/// FNV-1a (64-bit, hex) of convention_ledger(); stamped into provenance
/// blocks so exported data can be tied to the convention set that made it.
std::string convention_ledger_hash();

struct Provenance {
  std::string engine_version;
  std::string convention_hash;
  std::string timestamp;  // ISO-8601 UTC; empty when suppressed
};

Provenance make_provenance(bool with_timestamp = true);

}  // namespace polsq
