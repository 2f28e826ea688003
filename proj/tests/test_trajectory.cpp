#include <doctest.h>

#include <random>

#include "clawguard/trajectory.hpp"

using namespace clawguard;
using namespace clawguard::policy;
using namespace clawguard::trajectory;

namespace {

AtomicAction node(std::uint64_t seq, ActionCategory cat, const std::string& resource,
                  ResourceClass cls, const std::string& produces,
                  std::vector<std::string> consumes, TaintLabel arg_taint = {}) {
  AtomicAction a;
  a.seq = seq;
  a.descriptor.category = cat;
  a.descriptor.resource = resource;
  a.descriptor.resource_class = cls;
  a.descriptor.taint = arg_taint;
  a.produced_artifact = produces;
  a.consumed_artifacts = std::move(consumes);
  return a;
}

// The id_rsa chain: read secret -> compress -> post to a non-allowlisted host.
TrajectoryGraph idrsa_chain() {
  TrajectoryGraph g;
  REQUIRE(g.append_action(node(1, ActionCategory::READ_LOCAL, "/home/u/.ssh/id_rsa",
                               ResourceClass::SENSITIVE_SECRET, "a1", {}))
              .ok());
  REQUIRE(g.append_action(node(2, ActionCategory::ANALYZE, "/tmp/keys.zip",
                               ResourceClass::PUBLIC, "a2", {"a1"}))
              .ok());
  REQUIRE(g.append_action(node(3, ActionCategory::NETWORK_SEND, "drop.evil.example",
                               ResourceClass::PUBLIC, "a3", {"a2"}))
              .ok());
  g.propagate_taint();
  return g;
}

CapabilityProfile dev_profile() {
  CapabilityProfile p;
  p.profile_id = "dev";
  p.egress_allowlist = {"backup.corp.example"};
  return p;
}

// Brute force: taint = join of own taint over all ancestors.
TaintLabel oracle_taint(const TrajectoryGraph& g, const std::string& artifact_id) {
  const auto& artifacts = g.artifacts();
  TaintLabel out = artifacts.at(artifact_id).own;
  // ancestor artifact set via repeated expansion over nodes
  std::set<std::string> frontier = {artifact_id};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& n : g.nodes()) {
      if (n.produced_artifact.empty() || !frontier.count(n.produced_artifact)) continue;
      out = join(out, n.descriptor.taint);
      for (const auto& c : n.consumed_artifacts) {
        if (frontier.insert(c).second) grew = true;
      }
    }
  }
  for (const auto& id : frontier) out = join(out, artifacts.at(id).own);
  return out;
}

}  // namespace

TEST_CASE("append: secret read produces a SECRET artifact") {
  TrajectoryGraph g;
  REQUIRE(g.append_action(node(1, ActionCategory::READ_LOCAL, "/home/u/.ssh/id_rsa",
                               ResourceClass::SENSITIVE_SECRET, "a1", {}))
              .ok());
  CHECK(g.artifact_taint("a1")->sensitivity == Sensitivity::SECRET);
}

TEST_CASE("append: compression inherits SECRET from its input") {
  const auto g = idrsa_chain();
  CHECK(g.artifact_taint("a2")->sensitivity == Sensitivity::SECRET);
  CHECK(g.artifact_taint("a3")->sensitivity == Sensitivity::SECRET);
}

TEST_CASE("append: consuming a never-produced artifact fails") {
  TrajectoryGraph g;
  const auto status = g.append_action(
      node(1, ActionCategory::ANALYZE, "x", ResourceClass::PUBLIC, "a1", {"a9"}));
  REQUIRE_FALSE(status.ok());
  CHECK(status.error().code == "UNKNOWN_ARTIFACT");
}

TEST_CASE("append: seq must be monotone") {
  TrajectoryGraph g;
  REQUIRE(g.append_action(node(5, ActionCategory::ANALYZE, "x", ResourceClass::PUBLIC, "a1", {}))
              .ok());
  CHECK_FALSE(
      g.append_action(node(5, ActionCategory::ANALYZE, "y", ResourceClass::PUBLIC, "a2", {}))
          .ok());
}

TEST_CASE("propagate: chain and diamond match the hand-joined oracle") {
  SUBCASE("three node chain") {
    const auto g = idrsa_chain();
    CHECK(*g.artifact_taint("a3") == oracle_taint(g, "a3"));
  }
  SUBCASE("disconnected nodes keep their taints") {
    TrajectoryGraph g;
    REQUIRE(g.append_action(node(1, ActionCategory::READ_LOCAL, "a", ResourceClass::PUBLIC,
                                 "a1", {}, {Provenance::USER, Sensitivity::PUBLIC}))
                .ok());
    REQUIRE(g.append_action(node(2, ActionCategory::READ_LOCAL, "b",
                                 ResourceClass::SENSITIVE_SECRET, "a2", {}))
                .ok());
    g.propagate_taint();
    CHECK(g.artifact_taint("a1")->sensitivity == Sensitivity::PUBLIC);
    CHECK(g.artifact_taint("a2")->sensitivity == Sensitivity::SECRET);
  }
  SUBCASE("diamond joins both branches") {
    TrajectoryGraph g;
    REQUIRE(g.append_action(node(1, ActionCategory::READ_LOCAL, "seed",
                                 ResourceClass::SENSITIVE_SECRET, "a1", {}))
                .ok());
    REQUIRE(g.append_action(node(2, ActionCategory::ANALYZE, "left", ResourceClass::PUBLIC,
                                 "a2", {"a1"},
                                 {Provenance::UNTRUSTED_EXTERNAL, Sensitivity::PUBLIC}))
                .ok());
    REQUIRE(g.append_action(
                 node(3, ActionCategory::ANALYZE, "right", ResourceClass::PUBLIC, "a3", {"a1"}))
                .ok());
    REQUIRE(g.append_action(node(4, ActionCategory::ANALYZE, "join", ResourceClass::PUBLIC,
                                 "a4", {"a2", "a3"}))
                .ok());
    g.propagate_taint();
    CHECK(*g.artifact_taint("a4") ==
          TaintLabel{Provenance::UNTRUSTED_EXTERNAL, Sensitivity::SECRET});
    CHECK(*g.artifact_taint("a4") == oracle_taint(g, "a4"));
  }
}

TEST_CASE("detect_stac: the id_rsa chain raises S1 with the full path") {
  const auto g = idrsa_chain();
  const auto findings = detect_stac(g, dev_profile());
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule_id == "stac.s1");
  CHECK(findings[0].severity == Severity::CRITICAL);
  CHECK(findings[0].node_path == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("detect_stac: allowlisted destination is exempt") {
  TrajectoryGraph g;
  REQUIRE(g.append_action(node(1, ActionCategory::READ_LOCAL, "/home/u/.ssh/id_rsa",
                               ResourceClass::SENSITIVE_SECRET, "a1", {}))
              .ok());
  REQUIRE(g.append_action(node(2, ActionCategory::NETWORK_SEND, "backup.corp.example",
                               ResourceClass::PUBLIC, "a2", {"a1"}))
              .ok());
  g.propagate_taint();
  CHECK(detect_stac(g, dev_profile()).empty());
}

TEST_CASE("detect_stac: untrusted input reaching execution raises S2") {
  TrajectoryGraph g;
  REQUIRE(g.append_action(node(1, ActionCategory::NETWORK_FETCH, "evil.example",
                               ResourceClass::PUBLIC, "a1", {},
                               {Provenance::UNTRUSTED_EXTERNAL, Sensitivity::PUBLIC}))
              .ok());
  REQUIRE(g.append_action(node(2, ActionCategory::EXECUTE, "sh -c payload",
                               ResourceClass::PUBLIC, "a2", {"a1"}))
              .ok());
  g.propagate_taint();
  const auto findings = detect_stac(g, dev_profile());
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule_id == "stac.s2");
  CHECK(findings[0].node_path == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("detect_stac: untrusted write into agent memory raises S3") {
  TrajectoryGraph g;
  REQUIRE(g.append_action(node(1, ActionCategory::NETWORK_FETCH, "evil.example",
                               ResourceClass::PUBLIC, "a1", {},
                               {Provenance::UNTRUSTED_EXTERNAL, Sensitivity::PUBLIC}))
              .ok());
  REQUIRE(g.append_action(node(2, ActionCategory::WRITE_LOCAL, "memory/prefs.md",
                               ResourceClass::SENSITIVE_CONFIG, "a2", {"a1"}))
              .ok());
  g.propagate_taint();
  const auto findings = detect_stac(g, dev_profile());
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].rule_id == "stac.s3");
}

TEST_CASE("detect_stac: S1 survives interleaved benign actions") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    TrajectoryGraph g;
    std::uint64_t seq = 0;
    const auto benign = [&] {
      const auto s = ++seq;
      REQUIRE(g.append_action(node(s, ActionCategory::READ_LOCAL,
                                   "calendar/f" + std::to_string(rng() % 9),
                                   ResourceClass::USER_DATA,
                                   "b" + std::to_string(s), {}))
                  .ok());
    };
    const int pre = static_cast<int>(rng() % 3);
    const int mid = static_cast<int>(rng() % 3);
    const int late = static_cast<int>(rng() % 2);
    for (int i = 0; i < pre; ++i) benign();
    REQUIRE(g.append_action(node(++seq, ActionCategory::READ_LOCAL, "/home/u/.ssh/id_rsa",
                                 ResourceClass::SENSITIVE_SECRET, "k1", {}))
                .ok());
    for (int i = 0; i < mid; ++i) benign();
    REQUIRE(g.append_action(node(++seq, ActionCategory::ANALYZE, "/tmp/keys.zip",
                                 ResourceClass::PUBLIC, "k2", {"k1"}))
                .ok());
    for (int i = 0; i < late; ++i) benign();
    REQUIRE(g.append_action(node(++seq, ActionCategory::NETWORK_SEND, "drop.evil.example",
                                 ResourceClass::PUBLIC, "k3", {"k2"}))
                .ok());
    g.propagate_taint();
    const auto findings = detect_stac(g, dev_profile());
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].rule_id == "stac.s1");
    CHECK(findings[0].node_path.size() == 3);
  }
}

TEST_CASE("taint monotonicity over random growth sequences") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    TrajectoryGraph g;
    std::vector<std::string> ids;
    std::map<std::string, TaintLabel> before;
    for (std::uint64_t seq = 1; seq <= 12; ++seq) {
      std::vector<std::string> consumes;
      if (!ids.empty() && rng() % 2 == 0) consumes.push_back(ids[rng() % ids.size()]);
      TaintLabel arg{kAllProvenances[rng() % 5], kAllSensitivities[rng() % 3]};
      const std::string id = "t" + std::to_string(trial) + "n" + std::to_string(seq);
      REQUIRE(g.append_action(node(seq, ActionCategory::ANALYZE, "r" + std::to_string(seq),
                                   ResourceClass::PUBLIC, id, std::move(consumes), arg))
                  .ok());
      g.propagate_taint();
      for (const auto& [known, old_taint] : before) {
        CHECK(taint_leq(old_taint, *g.artifact_taint(known)));
      }
      before[id] = *g.artifact_taint(id);
      ids.push_back(id);
    }
  }
}

TEST_CASE("extract_intent spec examples") {
  SUBCASE("summarize maps to ANALYZE only") {
    const auto intent = extract_intent("I will summarize the quarterly report file");
    CHECK(intent.declared_categories ==
          std::set<ActionCategory>{ActionCategory::ANALYZE});
  }
  SUBCASE("empty reasoning yields empty profile") {
    CHECK(extract_intent("").declared_categories.empty());
  }
  SUBCASE("fetch then post covers three categories") {
    const auto intent = extract_intent("fetch the page, then post the summary to the team channel");
    CHECK(intent.declared_categories ==
          std::set<ActionCategory>{ActionCategory::NETWORK_FETCH, ActionCategory::NETWORK_SEND,
                                   ActionCategory::COMMUNICATE});
  }
  SUBCASE("inflected verbs resolve through the lemmatizer") {
    const auto intent = extract_intent("reading the calendar and saving notes");
    CHECK(intent.declared_categories ==
          std::set<ActionCategory>{ActionCategory::READ_LOCAL, ActionCategory::WRITE_LOCAL});
  }
}

TEST_CASE("correlate spec examples") {
  ActionDescriptor send;
  send.category = ActionCategory::NETWORK_SEND;
  send.tool = "http.post";

  IntentProfile analyze_only;
  analyze_only.declared_categories = {ActionCategory::ANALYZE};

  SUBCASE("analyze intent with a network send denies") {
    const auto v = correlate(analyze_only, send);
    CHECK(v.status == CorrelationStatus::MISMATCH);
    CHECK(v.disposition == Disposition::DENY);
    CHECK(v.finding->rule_id == "corr.mismatch");
    CHECK(v.finding->severity == Severity::CRITICAL);
  }
  SUBCASE("analyze intent covers local reads via closure") {
    ActionDescriptor read;
    read.category = ActionCategory::READ_LOCAL;
    const auto v = correlate(analyze_only, read);
    CHECK(v.status == CorrelationStatus::CONSISTENT);
    CHECK(v.disposition == Disposition::ALLOW);
  }
  SUBCASE("empty intent flags, never silently consistent") {
    ActionDescriptor fetch;
    fetch.category = ActionCategory::NETWORK_FETCH;
    const auto v = correlate(IntentProfile{}, fetch);
    CHECK(v.disposition == Disposition::FLAG);
    CHECK(v.finding->rule_id == "corr.no_intent");
  }
}

TEST_CASE("correlate totality: every intent set and category yields one verdict") {
  for (unsigned mask = 0; mask < 256; ++mask) {
    IntentProfile intent;
    for (int b = 0; b < 8; ++b) {
      if (mask & (1u << b)) intent.declared_categories.insert(kAllCategories[b]);
    }
    for (ActionCategory c : kAllCategories) {
      ActionDescriptor action;
      action.category = c;
      const auto v = correlate(intent, action);
      const bool consistent = v.status == CorrelationStatus::CONSISTENT;
      if (consistent) {
        CHECK(v.disposition == Disposition::ALLOW);
        CHECK_FALSE(v.finding.has_value());
      } else {
        CHECK(v.finding.has_value());
        CHECK((v.disposition == Disposition::FLAG || v.disposition == Disposition::DENY));
      }
    }
  }
}

TEST_CASE("chain rules json round trip") {
  const auto rules = default_chain_rules();
  const auto parsed = chain_rules_from_json(chain_rules_to_json(rules));
  REQUIRE(parsed.ok());
  CHECK(parsed.value().execute_min_provenance == Provenance::SKILL_THIRD_PARTY);
  CHECK(parsed.value().memory_dir_pattern == "memory/**");
}

TEST_CASE("verb lexicon json round trip") {
  const auto lex = default_verb_lexicon();
  const auto parsed = verb_lexicon_from_json(verb_lexicon_to_json(lex));
  REQUIRE(parsed.ok());
  CHECK(parsed.value().verbs.size() == lex.verbs.size());
}
