#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace clawguard {

// Provenance order (least to most hostile). Join takes the maximum.
enum class Provenance {
  TRUSTED_OPERATOR = 0,
  USER = 1,
  MEMORY_PERSISTED = 2,
  SKILL_THIRD_PARTY = 3,
  UNTRUSTED_EXTERNAL = 4,
};

enum class Sensitivity {
  PUBLIC = 0,
  INTERNAL = 1,
  SECRET = 2,
};

inline constexpr std::array<Provenance, 5> kAllProvenances = {
    Provenance::TRUSTED_OPERATOR, Provenance::USER, Provenance::MEMORY_PERSISTED,
    Provenance::SKILL_THIRD_PARTY, Provenance::UNTRUSTED_EXTERNAL};

inline constexpr std::array<Sensitivity, 3> kAllSensitivities = {
    Sensitivity::PUBLIC, Sensitivity::INTERNAL, Sensitivity::SECRET};

struct TaintLabel {
  Provenance provenance = Provenance::TRUSTED_OPERATOR;
  Sensitivity sensitivity = Sensitivity::PUBLIC;

  bool operator==(const TaintLabel&) const = default;
};

// Componentwise maximum; the lattice join.
TaintLabel join(TaintLabel a, TaintLabel b);

// True when every component of `a` is <= the corresponding component of `b`.
bool taint_leq(TaintLabel a, TaintLabel b);

std::string_view provenance_name(Provenance p);
std::string_view sensitivity_name(Sensitivity s);
std::optional<Provenance> provenance_from_name(std::string_view name);
std::optional<Sensitivity> sensitivity_from_name(std::string_view name);

std::string taint_to_string(TaintLabel t);

}  // namespace clawguard
