#include <doctest.h>

#include <vector>

#include "clawguard/taint.hpp"

using namespace clawguard;

namespace {

std::vector<TaintLabel> all_labels() {
  std::vector<TaintLabel> out;
  for (Provenance p : kAllProvenances) {
    for (Sensitivity s : kAllSensitivities) out.push_back({p, s});
  }
  return out;
}

}  // namespace

TEST_CASE("join is the componentwise maximum") {
  // hand-enumerated entries of the 5x3 join table
  CHECK(join({Provenance::UNTRUSTED_EXTERNAL, Sensitivity::PUBLIC},
             {Provenance::USER, Sensitivity::SECRET}) ==
        TaintLabel{Provenance::UNTRUSTED_EXTERNAL, Sensitivity::SECRET});
  CHECK(join({Provenance::TRUSTED_OPERATOR, Sensitivity::PUBLIC},
             {Provenance::TRUSTED_OPERATOR, Sensitivity::PUBLIC}) ==
        TaintLabel{Provenance::TRUSTED_OPERATOR, Sensitivity::PUBLIC});
  CHECK(join({Provenance::MEMORY_PERSISTED, Sensitivity::INTERNAL},
             {Provenance::SKILL_THIRD_PARTY, Sensitivity::PUBLIC}) ==
        TaintLabel{Provenance::SKILL_THIRD_PARTY, Sensitivity::INTERNAL});
}

TEST_CASE("lattice laws hold over all 15 labels") {
  const auto labels = all_labels();
  REQUIRE(labels.size() == 15);
  for (const auto& a : labels) {
    CHECK(join(a, a) == a);  // idempotent
    for (const auto& b : labels) {
      CHECK(join(a, b) == join(b, a));  // commutative
      CHECK(taint_leq(a, join(a, b)));  // upper bound
      for (const auto& c : labels) {
        CHECK(join(join(a, b), c) == join(a, join(b, c)));  // associative
      }
    }
  }
}

TEST_CASE("provenance ordering matches the declared chain") {
  CHECK(Provenance::TRUSTED_OPERATOR < Provenance::USER);
  CHECK(Provenance::USER < Provenance::MEMORY_PERSISTED);
  CHECK(Provenance::MEMORY_PERSISTED < Provenance::SKILL_THIRD_PARTY);
  CHECK(Provenance::SKILL_THIRD_PARTY < Provenance::UNTRUSTED_EXTERNAL);
}

TEST_CASE("name round trips") {
  for (Provenance p : kAllProvenances) {
    CHECK(provenance_from_name(provenance_name(p)) == p);
  }
  for (Sensitivity s : kAllSensitivities) {
    CHECK(sensitivity_from_name(sensitivity_name(s)) == s);
  }
  CHECK_FALSE(provenance_from_name("BOGUS").has_value());
}
