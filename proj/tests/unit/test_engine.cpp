#include "liststand/engine.hpp"
#include "liststand/error.hpp"
#include "liststand/message_io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace liststand;

namespace {

std::string mbox_of(const std::vector<Message>& ms) {
  std::string out;
  for (const auto& m : ms) {
    out += "From " + m.from_address + " Mon Apr 01 12:00:00 2002\n";
    out += "Message-ID: <" + m.message_id + ">\n";
    out += "From: " + (m.from_display ? "\"" + *m.from_display + "\" " : std::string()) + "<" + m.from_address + ">\n";
    out += "Date: Mon, 01 Apr 2002 12:00:00 +0000\n";
    if (m.in_reply_to) out += "In-Reply-To: <" + *m.in_reply_to + ">\n";
    out += "Subject: Re: [list] topic\n\nbody\n\n";
  }
  return out;
}

QuerySpec count_spec() {
  return query_from_json(nlohmann::json::parse(R"({"source":"messages","bindings":[{"var":"m","path":"message"}],
    "template":{"element":"n","children":[{"aggregate":"count","of":"$m"}]}})"));
}

}  // namespace

TEST_CASE("store, derive and analyse in memory") {
  Engine e;
  support::Rng rng(1);
  auto ms = support::analytics_fixture(rng, 80);
  auto report = e.store_messages(ms);
  CHECK(report.stored == ms.size());
  CHECK(e.store_messages(ms).duplicates == ms.size());
  CHECK(e.warehouse().version(messages_collection) == ms.size());

  auto corpus = e.corpus();
  CHECK(corpus->messages.size() == ms.size());
  CHECK(e.corpus() == corpus);  // cached while unchanged
  CHECK(e.stats("posts_per_entity") == posts_per_entity(corpus->messages, corpus->catalog));
  CHECK(e.stats("posts_per_domain") == posts_per_domain(corpus->messages));
  CHECK_THROWS_AS(e.stats("nonsense"), Error);
  CHECK(e.graph() == coparticipation_graph(corpus->messages, corpus->forest, corpus->catalog));
  CHECK(e.discussions(2, DiscussionScope::per_thread) ==
        discussions(corpus->forest, entity_lookup(corpus->messages, corpus->catalog), 2));

  auto q = e.query(count_spec());
  REQUIRE(q.documents.size() == 1);
  CHECK(q.documents[0].text == std::to_string(ms.size()));
  CHECK(e.schema_of("messages") == message_schema());

  e.store_messages({support::make_message("late@x", "new@x.org", make_timestamp(2005, 1, 1))});
  CHECK(e.corpus() != corpus);
  CHECK(e.corpus()->messages.size() == ms.size() + 1);
}

TEST_CASE("ingest from files and persist across reopen") {
  support::TempDir dir;
  support::Rng rng(2);
  auto ms = support::analytics_fixture(rng, 40);
  std::ofstream(dir.path / "in.mbox") << mbox_of(ms);
  std::ofstream(dir.path / "institutions.csv") << "*.ibm.com,IBM\nibm.com,IBM\n";
  std::filesystem::create_directory(dir.path / "data");
  std::filesystem::copy(dir.path / "institutions.csv", dir.path / "data" / "institutions.csv");

  EngineConfig cfg;
  cfg.data_dir = dir.path / "data";
  RankedTable domains;
  {
    Engine e(cfg);
    auto r = e.ingest({{"in", SourceKind::mbox_file, (dir.path / "in.mbox").string()}});
    CHECK(r.loaded == ms.size());
    CHECK(r.stored == ms.size());
    CHECK(r.errors.empty());
    domains = e.stats("posts_per_domain");
    for (const auto& row : domains.rows) CHECK(row.key.find("ibm.com") == std::string::npos);
    e.views().register_view("mv", count_spec(), true);
    e.assert_facts(support::rec_fixture_facts_jsonl());
    e.persist();
  }
  Engine again(cfg);
  CHECK(again.corpus()->messages.size() == ms.size());
  CHECK(again.stats("posts_per_domain") == domains);
  CHECK(again.views().has_view("mv"));
  CHECK(!again.views().is_stale("mv"));
  auto rows = again.recommendations();
  REQUIRE(!rows.empty());
  CHECK(rows[0] == RecommendationRow{"IBM", "Corp", 11, 8, 2, 3});
  CHECK(again.known_by("Ann Onymous", make_timestamp(2008, 1, 1)).size() == again.facts().size());
}

TEST_CASE("facts need researcher chains") {
  Engine e;
  CHECK_THROWS_AS(e.assert_fact({"a", "b", "c", {}}, {{"x", AttributionKind::published, make_timestamp(2001, 1, 1)}}),
                  Error);
  CHECK(e.assert_fact({"a", "b", "c", {}}, {{"x", AttributionKind::learned, make_timestamp(2001, 1, 1)}}) >= 0);
  CHECK(e.facts().size() == 1);
}

TEST_CASE("profile of an unknown entity") {
  Engine e;
  e.store_messages({support::make_message("a@x", "a@x.org", make_timestamp(2002, 1, 1))});
  CHECK_THROWS_AS(e.profile(999999), Error);
  CHECK(e.profile(e.corpus()->catalog.entities()[0].entity_id).rows.empty());
}
