#include <gtest/gtest.h>

#include "archgraph/curation_store.hpp"
#include "archgraph/error.hpp"
#include "oracles.hpp"

using namespace archgraph;

namespace {

Mention person(const std::string& record, std::size_t row, const std::string& name, const std::string& place = "") {
  Mention m;
  m.entity_type = "person";
  m.group = "name";
  m.attributes = {{"name", name}};
  if (!place.empty()) m.attributes.push_back({"birth_place", place});
  m.anchor = Anchor{record, "crew", row, {"name"}};
  return m;
}

Mention term_mention(const std::string& vocab, const std::string& raw, std::size_t row) {
  Mention m;
  m.kind = MentionKind::kTerm;
  m.vocabulary = vocab;
  m.raw = raw;
  m.anchor = Anchor{"reg-001", "crew", row, {"profession"}};
  return m;
}

MatchRule name_rule() {
  MatchRule r;
  r.entity_type = "person";
  r.key_roles = {"name"};
  return r;
}

std::string local_named(const CurationStore& s, const std::string& name) {
  for (const auto& [id, l] : s.locals()) {
    if (l.attribute("name") == name) return id;
  }
  return "";
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST(Curation, IngestCreatesSingletonMastersAndIsIdempotent) {
  CurationStore s;
  std::vector<Mention> ms{person("r1", 0, "Agostino B??ndi"), person("r2", 0, "A Brondi"), term_mention("professions", "Capitano", 0)};
  auto report = s.ingest_mentions(ms);
  EXPECT_EQ(report.new_locals, 2);
  EXPECT_EQ(report.new_terms, 1);
  EXPECT_EQ(s.masters().size(), 2u);
  auto again = s.ingest_mentions(ms);
  EXPECT_EQ(again.new_locals, 0);
  EXPECT_EQ(again.unchanged_locals, 2);
  EXPECT_EQ(s.locals().size(), 2u);
  EXPECT_TRUE(s.check_partition());
}

TEST(Curation, IngestRejectsDanglingAnchors) {
  CurationStore s;
  EXPECT_EQ(code_of([&] { s.ingest_mentions({person("r1", 0, "X")}, [](const Anchor&) { return false; }); }),
            ErrorCode::kDanglingAnchor);
  EXPECT_TRUE(s.locals().empty());
}

TEST(Curation, AutoMatchUsesNormalisedKeysOnly) {
  CurationStore s;
  s.ingest_mentions({person("r1", 0, "Giovanni Rossi"), person("r2", 0, " giovanni  ROSSI"), person("r1", 1, "Agostino B??ndi"),
                     person("r2", 1, "A Brondi"), person("r3", 0, "")});
  auto report = s.auto_match({name_rule()});
  EXPECT_EQ(report.masters_before, 5);
  EXPECT_EQ(report.masters_after, 4);
  auto a = s.find_local(local_named(s, "Agostino B??ndi"));
  auto b = s.find_local(local_named(s, "A Brondi"));
  EXPECT_NE(a->master_id, b->master_id);
  EXPECT_EQ(s.find_local(local_named(s, "Giovanni Rossi"))->master_id,
            s.find_local(local_named(s, " giovanni  ROSSI"))->master_id);
}

TEST(Curation, AutoMatchRejectsUnknownRoles) {
  CurationStore s;
  s.ingest_mentions({person("r1", 0, "X")});
  MatchRule r = name_rule();
  r.key_roles = {"surname"};
  EXPECT_EQ(code_of([&] { s.auto_match({r}); }), ErrorCode::kUnknownRole);
}

TEST(Curation, ManualMatchThenUnmatchIsDurable) {
  CurationStore s;
  s.ingest_mentions({person("r1", 0, "Agostino B??ndi"), person("r2", 0, "A Brondi"), person("r3", 0, "A Brondi")});
  std::string a = local_named(s, "Agostino B??ndi");
  std::string b = s.find_local(local_named(s, "A Brondi"))->local_id;
  std::string m = s.manual_match({a, b});
  EXPECT_EQ(s.find_master(m)->members.size(), 2u);
  EXPECT_EQ(s.manual_match({a, b}), m);

  // Auto-match folds the third A Brondi into the manual cluster.
  s.auto_match({name_rule()});
  EXPECT_EQ(s.find_master(s.find_local(a)->master_id)->members.size(), 3u);

  std::string single = s.unmatch(a);
  EXPECT_EQ(s.find_master(single)->members, std::set<std::string>{a});
  EXPECT_EQ(code_of([&] { s.unmatch(a); }), ErrorCode::kAlreadySingleton);
  s.auto_match({name_rule()});
  EXPECT_EQ(s.find_master(s.find_local(a)->master_id)->members.size(), 1u);
  EXPECT_EQ(code_of([&] { s.manual_match({a, b}); }), ErrorCode::kExceptionConflict);
  EXPECT_TRUE(s.check_partition());
}

TEST(Curation, ManualMatchChecksTypes) {
  CurationStore s;
  Mention loc = person("r1", 1, "Genova");
  loc.entity_type = "location";
  loc.group = "birth_place";
  s.ingest_mentions({person("r1", 0, "X"), loc});
  auto ls = s.locals();
  std::set<std::string> ids;
  for (const auto& [id, _] : ls) ids.insert(id);
  EXPECT_EQ(code_of([&] { s.manual_match(ids); }), ErrorCode::kTypeMismatch);
  EXPECT_EQ(code_of([&] { s.manual_match({"m-nope"}); }), ErrorCode::kUnknownTarget);
}

TEST(Curation, MasterIdentityAndPreferredValuesSurviveMerges) {
  CurationStore s;
  s.ingest_mentions({person("r1", 0, "Luigi Ferrari"), person("r2", 0, "Luigi Ferrari"), person("r3", 0, "L. Ferrari")});
  std::string l3 = local_named(s, "L. Ferrari");
  std::string m3 = s.find_local(l3)->master_id;
  s.set_preferred(m3, "name", "Luigi Ferrari");
  s.auto_match({name_rule()});
  std::string merged = s.manual_match({l3, local_named(s, "Luigi Ferrari")});
  EXPECT_EQ(s.resolve_master(m3), merged);
  EXPECT_EQ(s.find_master(merged)->members.size(), 3u);
  auto appearances = s.list_appearances(merged);
  EXPECT_EQ(appearances.size(), 3u);
}

TEST(Curation, EnrichmentsOnlyOnLocations) {
  CurationStore s;
  Mention loc = person("r1", 1, "Sardinia");
  loc.entity_type = "location";
  s.ingest_mentions({person("r1", 0, "X"), loc});
  for (const auto& [id, m] : s.masters()) {
    if (m.entity_type == "location") {
      EXPECT_EQ(s.set_enrichment(id, "coordinates", "40.0,9.0").enrichments.at("coordinates"), "40.0,9.0");
      EXPECT_EQ(code_of([&] { s.set_enrichment(id, "colour", "x"); }), ErrorCode::kInvalidEnrichment);
    } else {
      EXPECT_EQ(code_of([&] { s.set_enrichment(id, "coordinates", "x"); }), ErrorCode::kInvalidEnrichment);
    }
  }
}

TEST(Curation, TermsPreferredAndAcyclicBroader) {
  CurationStore s;
  s.ingest_mentions({term_mention("professions", "Capitano", 0), term_mention("professions", "Marinaio", 1), term_mention("professions", "Mozzo", 2)});
  EXPECT_EQ(s.set_preferred_term("professions", "Capitano", "Captain").preferred_term, "Captain");
  s.set_broader("professions", "Mozzo", "Marinaio");
  s.set_broader("professions", "Marinaio", "Capitano");
  EXPECT_EQ(code_of([&] { s.set_broader("professions", "Capitano", "Mozzo"); }), ErrorCode::kCycleDetected);
  EXPECT_EQ(code_of([&] { s.set_broader("professions", "Capitano", "Capitano"); }), ErrorCode::kCycleDetected);
  EXPECT_EQ(code_of([&] { s.set_broader("professions", "Capitano", "Ammiraglio"); }), ErrorCode::kUnknownTerm);
  EXPECT_EQ(s.list_term_appearances("professions", "Mozzo").size(), 1u);
  // Raw text is never rewritten.
  EXPECT_EQ(s.terms().at({"professions", "Capitano"}).raw, "Capitano");
}

TEST(Curation, StateRoundTripsThroughJson) {
  CurationStore s;
  s.ingest_mentions({person("r1", 0, "A"), person("r2", 0, "a"), person("r3", 0, "B"), term_mention("professions", "Mozzo", 0)});
  s.auto_match({name_rule()});
  s.unmatch(local_named(s, "a"));
  CurationStore t;
  t.restore(s.to_json());
  EXPECT_EQ(t.to_json(), s.to_json());
  EXPECT_EQ(oracle::partition_of(t, "person"), oracle::partition_of(s, "person"));
}

TEST(Curation, PartitionInvariantUnderRandomOperations) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    CurationStore s;
    std::vector<Mention> ms;
    const std::vector<std::string> names{"A", "a", "B", "b ", "C"};
    for (std::size_t i = 0; i < 30; ++i) ms.push_back(person("r" + std::to_string(i % 3), i, names[rng() % names.size()]));
    s.ingest_mentions(ms);
    for (int op = 0; op < 40; ++op) {
      auto locals = s.locals();
      std::vector<std::string> ids;
      for (const auto& [id, _] : locals) ids.push_back(id);
      try {
        switch (rng() % 3) {
          case 0: s.auto_match({name_rule()}); break;
          case 1: s.manual_match({ids[rng() % ids.size()], ids[rng() % ids.size()]}); break;
          case 2: s.unmatch(ids[rng() % ids.size()]); break;
        }
      } catch (const Error& e) {
        EXPECT_TRUE(e.code() == ErrorCode::kAlreadySingleton || e.code() == ErrorCode::kExceptionConflict) << e.what();
      }
      std::string why;
      ASSERT_TRUE(s.check_partition(&why)) << why;
    }
  }
}

TEST(Curation, AutoMatchAgreesWithBruteForceOracle) {
  for (std::uint32_t seed = 1; seed <= 30; ++seed) {
    auto trial = oracle::match_trial(seed, 20 + seed * 5);
    EXPECT_EQ(trial.discrepancies, 0u) << trial.detail;
  }
}
