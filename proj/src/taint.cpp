#include "clawguard/taint.hpp"

#include <algorithm>

namespace clawguard {

TaintLabel join(TaintLabel a, TaintLabel b) {
  TaintLabel out;
  out.provenance = std::max(a.provenance, b.provenance);
  out.sensitivity = std::max(a.sensitivity, b.sensitivity);
  return out;
}

bool taint_leq(TaintLabel a, TaintLabel b) {
  return a.provenance <= b.provenance && a.sensitivity <= b.sensitivity;
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::TRUSTED_OPERATOR: return "TRUSTED_OPERATOR";
    case Provenance::USER: return "USER";
    case Provenance::MEMORY_PERSISTED: return "MEMORY_PERSISTED";
    case Provenance::SKILL_THIRD_PARTY: return "SKILL_THIRD_PARTY";
    case Provenance::UNTRUSTED_EXTERNAL: return "UNTRUSTED_EXTERNAL";
  }
  return "UNKNOWN";
}

std::string_view sensitivity_name(Sensitivity s) {
  switch (s) {
    case Sensitivity::PUBLIC: return "PUBLIC";
    case Sensitivity::INTERNAL: return "INTERNAL";
    case Sensitivity::SECRET: return "SECRET";
  }
  return "UNKNOWN";
}

std::optional<Provenance> provenance_from_name(std::string_view name) {
  for (Provenance p : kAllProvenances) {
    if (provenance_name(p) == name) return p;
  }
  return std::nullopt;
}

std::optional<Sensitivity> sensitivity_from_name(std::string_view name) {
  for (Sensitivity s : kAllSensitivities) {
    if (sensitivity_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string taint_to_string(TaintLabel t) {
  std::string out = "(";
  out += provenance_name(t.provenance);
  out += ", ";
  out += sensitivity_name(t.sensitivity);
  out += ")";
  return out;
}

}  // namespace clawguard
