#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "clawguard/harness.hpp"

using namespace clawguard;
using namespace clawguard::harness;
namespace fs = std::filesystem;

namespace {

const Corpus& corpus() {
  static const Corpus c = [] {
    auto r = load_corpus(CLAWGUARD_CORPUS_DIR);
    REQUIRE(r.ok());
    return r.take();
  }();
  return c;
}

const Scenario& scenario_by_id(const std::string& id) {
  for (const auto& s : corpus().scenarios) {
    if (s.scenario_id == id) return s;
  }
  REQUIRE(false);
  static Scenario dummy;
  return dummy;
}

fs::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng{std::random_device{}()};
  const auto dir = fs::temp_directory_path() / ("clawguard-harness-" + tag + "-" +
                                                std::to_string(rng()));
  fs::create_directories(dir);
  return dir;
}

ReplayReport fabricate(const std::string& id, const std::string& row, Outcome outcome) {
  ReplayReport r;
  r.scenario_id = id;
  r.taxonomy_ref = row;
  r.outcome = outcome;
  return r;
}

}  // namespace

TEST_CASE("load_corpus: the shipped corpus covers every taxonomy row") {
  const auto& c = corpus();
  CHECK(c.scenarios.size() >= 11);
  for (const auto& row : kTaxonomyRows) {
    const bool covered = std::any_of(c.scenarios.begin(), c.scenarios.end(),
                                     [&](const Scenario& s) { return s.taxonomy_ref == row; });
    CAPTURE(row);
    CHECK(covered);
  }
  int benign = 0;
  for (const auto& s : c.scenarios) {
    if (s.taxonomy_ref == "benign") ++benign;
  }
  CHECK(benign >= 3);
}

TEST_CASE("load_corpus: a corpus missing a row fails with MISSING_ROW_COVERAGE") {
  const auto dir = temp_dir("partial");
  fs::create_directories(dir / "scenarios");
  fs::copy(fs::path(CLAWGUARD_CORPUS_DIR) / "config.json", dir / "config.json");
  for (const char* sub : {"profiles", "fixtures", "skills"}) {
    fs::copy(fs::path(CLAWGUARD_CORPUS_DIR) / sub, dir / sub, fs::copy_options::recursive);
  }
  for (const auto& entry :
       fs::directory_iterator(fs::path(CLAWGUARD_CORPUS_DIR) / "scenarios")) {
    if (entry.path().filename() == "07_clawjacked.json") continue;
    fs::copy(entry.path(), dir / "scenarios" / entry.path().filename());
  }
  const auto r = load_corpus(dir.string());
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().code == "MISSING_ROW_COVERAGE");
  fs::remove_all(dir);
}

TEST_CASE("load_corpus: malformed scenario documents are rejected") {
  const auto r = scenario_from_json(nlohmann::json{{"scenario_id", "x"}});
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().code == "MALFORMED_SCENARIO");
}

TEST_CASE("replay: the STAC scenario is detected at the trajectory stage") {
  const auto report = replay(scenario_by_id("stac-idrsa-exfil"), corpus(), {});
  CHECK(report.outcome == Outcome::DETECTED);
  CHECK(report.deciding_stage == "trajectory");
  REQUIRE_FALSE(report.finding_rules.empty());
  CHECK(report.finding_rules[0].rfind("stac.s1", 0) == 0);
}

TEST_CASE("replay: the instruction-amnesia scenario cites the pin after 200 calls") {
  const auto report = replay(scenario_by_id("amnesia-pin-survives-pressure"), corpus(), {});
  CHECK(report.outcome == Outcome::DETECTED);
  CHECK(report.deciding_stage == "policy");
  const bool cites_pin = std::any_of(report.finding_rules.begin(), report.finding_rules.end(),
                                     [](const std::string& r) {
                                       return r.rfind("policy.pin", 0) == 0;
                                     });
  CHECK(cites_pin);
}

TEST_CASE("replay: benign scenarios complete ALLOW end to end") {
  for (const char* id : {"benign-calendar-read", "benign-web-summary", "benign-a2a-status"}) {
    const auto report = replay(scenario_by_id(id), corpus(), {});
    CAPTURE(id);
    CAPTURE(report.detail);
    CHECK(report.outcome == Outcome::DETECTED);
    CHECK(report.final_disposition == Disposition::ALLOW);
  }
}

TEST_CASE("replay: reproducible outcomes and findings on fresh gateways") {
  for (const char* id : {"stac-idrsa-exfil", "injection-hidden-comment", "benign-web-summary"}) {
    const auto a = replay(scenario_by_id(id), corpus(), {});
    const auto b = replay(scenario_by_id(id), corpus(), {});
    CAPTURE(id);
    CHECK(a.outcome == b.outcome);
    CHECK(a.deciding_stage == b.deciding_stage);
    CHECK(a.finding_rules == b.finding_rules);
  }
}

TEST_CASE("replay: run dir captures transcripts and reports") {
  const auto dir = temp_dir("rundir");
  RunOptions options;
  options.run_dir = dir.string();
  options.scenario_filter = "clawjacked-fingerprint-swap";
  const auto reports = replay_all(corpus(), options);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].outcome == Outcome::DETECTED);
  CHECK(fs::exists(dir / "transcripts" / "clawjacked-fingerprint-swap.jsonl"));
  CHECK(fs::exists(dir / "reports.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("score: spec arithmetic") {
  SUBCASE("all detected, benign clean") {
    std::vector<ReplayReport> reports;
    for (const auto& row : kTaxonomyRows) {
      reports.push_back(fabricate("s-" + row, row, Outcome::DETECTED));
    }
    for (int i = 0; i < 3; ++i) {
      reports.push_back(fabricate("b" + std::to_string(i), "benign", Outcome::DETECTED));
    }
    const auto s = score(reports);
    REQUIRE(s.ok());
    CHECK(s.value().overall_rate == doctest::Approx(1.0));
    CHECK(s.value().false_block_rate == doctest::Approx(0.0));
  }
  SUBCASE("one of eight rows missed") {
    std::vector<ReplayReport> reports;
    for (const auto& row : kTaxonomyRows) {
      reports.push_back(fabricate("s-" + row, row,
                                  row == "stac" ? Outcome::MISSED : Outcome::DETECTED));
    }
    const auto s = score(reports);
    REQUIRE(s.ok());
    CHECK(s.value().per_row.at("stac").detected == 0);
    CHECK(s.value().overall_rate == doctest::Approx(7.0 / 8.0));
  }
  SUBCASE("empty report list is an error") {
    CHECK_FALSE(score({}).ok());
  }
  SUBCASE("benign denial counts as a false block") {
    std::vector<ReplayReport> reports = {fabricate("b0", "benign", Outcome::FALSE_BLOCK),
                                         fabricate("b1", "benign", Outcome::DETECTED)};
    const auto s = score(reports);
    REQUIRE(s.ok());
    CHECK(s.value().false_block_rate == doctest::Approx(0.5));
  }
}

TEST_CASE("fold_back: missed scenarios become governance proposals") {
  sandbox::GovernanceLog governance;
  std::vector<ReplayReport> reports = {
      fabricate("variant-x", "indirect_prompt_injection", Outcome::MISSED)};
  const auto r = fold_back(reports, default_lexicon(), policy::default_sensitive_paths(),
                           std::nullopt, governance);
  REQUIRE(r.ok());
  REQUIRE(r.value().proposals.size() == 1);
  CHECK(r.value().proposals[0]["scenario"] == "variant-x");
  CHECK_FALSE(r.value().lexicon_changed);
  CHECK(governance.records().size() == 1);
  CHECK(governance.records()[0]["kind"] == "proposal");
}

TEST_CASE("fold_back: advisory feed merges with a version bump") {
  const auto dir = temp_dir("feed");
  const auto feed_path = dir / "feed.json";
  {
    std::ofstream out(feed_path);
    out << R"({"records": [
      {"kind": "sensitive_path", "pattern": "~/.kube/**", "class": "SENSITIVE_SECRET"},
      {"kind": "lexicon_rule", "rule": {"id": "inj.kube_probe", "kind": "phrase",
        "severity": "HIGH", "pattern": "kubeconfig"}}
    ]})";
  }
  sandbox::GovernanceLog governance;
  const Lexicon base = default_lexicon();
  const auto paths = policy::default_sensitive_paths();
  const auto r = fold_back({fabricate("s", "stac", Outcome::DETECTED)}, base, paths,
                           feed_path.string(), governance);
  REQUIRE(r.ok());
  CHECK(r.value().lexicon_changed);
  CHECK(r.value().sensitive_paths_changed);
  CHECK(r.value().merged_lexicon.version == base.version + 1);
  CHECK(r.value().merged_sensitive_paths.version == paths.version + 1);
  CHECK(r.value().merged_lexicon.find("inj.kube_probe") != nullptr);
  CHECK(r.value().merged_sensitive_paths.classify("/home/u/.kube/config", "/home/u") ==
        policy::ResourceClass::SENSITIVE_SECRET);

  SUBCASE("empty feed leaves everything untouched") {
    const auto empty_path = dir / "empty.json";
    {
      std::ofstream out(empty_path);
      out << R"({"records": []})";
    }
    const auto r2 = fold_back({}, base, paths, empty_path.string(), governance);
    REQUIRE(r2.ok());
    CHECK(r2.value().proposals.empty());
    CHECK_FALSE(r2.value().lexicon_changed);
    CHECK(r2.value().merged_lexicon.version == base.version);
  }
  SUBCASE("malformed feed is rejected") {
    const auto bad_path = dir / "bad.json";
    {
      std::ofstream out(bad_path);
      out << R"({"entries": "nope"})";
    }
    const auto r3 = fold_back({}, base, paths, bad_path.string(), governance);
    REQUIRE_FALSE(r3.ok());
    CHECK(r3.error().code == "FEED_MALFORMED");
  }
  fs::remove_all(dir);
}

TEST_CASE("snapshot_tree: stable digest, sensitive to content changes") {
  const auto dir = temp_dir("snap");
  {
    std::ofstream out(dir / "a.txt");
    out << "alpha";
  }
  const auto first = snapshot_tree(dir.string());
  CHECK(snapshot_tree(dir.string()) == first);
  {
    std::ofstream out(dir / "a.txt");
    out << "beta";
  }
  CHECK(snapshot_tree(dir.string()) != first);
  fs::remove_all(dir);
}
