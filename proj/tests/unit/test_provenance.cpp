#include "liststand/error.hpp"
#include "liststand/provenance.hpp"
#include "liststand/warehouse.hpp"
#include "support.hpp"

#include <doctest.h>

#include <thread>

using namespace liststand;

namespace {

Fact john() { return {"John Doe", "joined", "XML Corp", make_timestamp(2001, 10, 10)}; }

std::vector<Attribution> ann_chain() {
  return {{"Le Monde", AttributionKind::published, make_timestamp(2006, 3, 4)},
          {"Ann Onymous", AttributionKind::learned, make_timestamp(2008, 1, 1)}};
}

std::vector<FactId> ids(const std::vector<SourcedFact>& fs) {
  std::vector<FactId> out;
  for (const auto& f : fs) out.push_back(f.fact_id);
  return out;
}

}  // namespace

TEST_CASE("the canonical example") {
  FactStore s;
  FactId id = s.assert_fact(john(), ann_chain(), ChainPolicy::researcher);
  CHECK(s.known_by("Ann Onymous", make_timestamp(2007, 12, 31)).empty());
  auto known = s.known_by("Ann Onymous", make_timestamp(2008, 1, 1));
  REQUIRE(known.size() == 1);
  CHECK(known[0].fact_id == id);
  CHECK(known[0].fact == john());
  CHECK(s.known_by("Nobody", make_timestamp(2020, 1, 1)).empty());
  CHECK(ids(s.via_source("Le Monde")) == std::vector<FactId>{id});
  CHECK(ids(s.via_source("Ann Onymous")) == std::vector<FactId>{id});
  CHECK(ids(s.events_between(make_timestamp(2001, 1, 1), make_timestamp(2001, 12, 31))) == std::vector<FactId>{id});
  CHECK(s.events_between(make_timestamp(2002, 1, 1), make_timestamp(2002, 12, 31)).empty());
  CHECK_THROWS_AS(s.events_between(make_timestamp(2002, 1, 1), make_timestamp(2001, 1, 1)), Error);
  CHECK(FactStore().via_source("x").empty());
}

TEST_CASE("chain rules") {
  FactStore s;
  auto reversed = ann_chain();
  std::swap(reversed[0].time, reversed[1].time);
  try {
    s.assert_fact(john(), reversed);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::rejected);
    CHECK(std::string(e.what()) == "non-monotone attribution chain");
  }
  CHECK_THROWS_AS(s.assert_fact(john(), {}), Error);
  CHECK(s.size() == 0);

  Fact bare{"a", "b", "c", std::nullopt};
  FactId id = s.assert_fact(bare, {{"me", AttributionKind::observed, make_timestamp(2009, 1, 1)}});
  CHECK(s.events_between(Timestamp{}, make_timestamp(2100, 1, 1)).empty());
  CHECK(s.assert_fact(bare, {{"me", AttributionKind::observed, make_timestamp(2009, 1, 1)}}) > id);

  // a researcher entry must end with learning or observing
  CHECK_THROWS_AS(s.assert_fact(bare, {{"paper", AttributionKind::published, make_timestamp(2009, 1, 1)}},
                                ChainPolicy::researcher),
                  Error);
  CHECK_THROWS_AS(s.assert_fact({"", "b", "c", {}}, {{"me", AttributionKind::observed, make_timestamp(2009, 1, 1)}}),
                  Error);
}

TEST_CASE("random chains: monotone knowledge and read-your-writes") {
  support::Rng rng(21);
  FactStore s;
  const std::vector<std::string> agents = {"A", "B", "C", "D"};
  std::size_t accepted = 0, rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<Attribution> chain;
    Timestamp t = make_timestamp(2000, 1, 1) + std::chrono::hours(support::uniform(rng, 0, 20000));
    bool monotone = true;
    for (std::size_t k = 0, n = support::uniform(rng, 1, 4); k < n; ++k) {
      std::int64_t step = static_cast<std::int64_t>(support::uniform(rng, 0, 2000)) - (support::chance(rng, 0.1) ? 2500 : 0);
      if (k > 0 && step < 0) monotone = false;
      if (k > 0) t += std::chrono::hours(step);
      chain.push_back({agents[support::uniform(rng, 0, 3)], AttributionKind::observed, t});
    }
    Fact f{"s" + std::to_string(i), "p", "o", std::nullopt};
    if (!monotone) {
      CHECK_THROWS_AS(s.assert_fact(f, chain), Error);
      ++rejected;
      continue;
    }
    FactId id = s.assert_fact(f, chain);
    ++accepted;
    auto now = ids(s.known_by(chain.back().agent, chain.back().time));
    CHECK(std::find(now.begin(), now.end(), id) != now.end());
  }
  CHECK(accepted > 0);
  CHECK(rejected > 0);
  for (const auto& a : agents) {
    std::set<FactId> via;
    for (auto id : ids(s.via_source(a))) via.insert(id);
    std::set<FactId> prev;
    for (int y = 1999; y <= 2004; ++y) {
      std::set<FactId> cur;
      for (auto id : ids(s.known_by(a, make_timestamp(y, 6, 1)))) cur.insert(id);
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      CHECK(std::includes(via.begin(), via.end(), cur.begin(), cur.end()));
      prev = cur;
    }
  }
}

TEST_CASE("persistence round trip through a collection") {
  FactStore s;
  s.assert_fact(john(), ann_chain());
  s.assert_fact({"x", "y", "z", std::nullopt}, {{"Q", AttributionKind::observed, make_timestamp(2010, 1, 1)}});
  Warehouse w;
  s.save_to(w);
  auto back = FactStore::load_from(w);
  CHECK(back.all() == s.all());
  for (const auto& f : s.all()) {
    CHECK(fact_from_tree(fact_to_tree(f)) == f);
    auto [fact, chain] = fact_entry_from_json(fact_to_json(f));
    CHECK(fact == f.fact);
    CHECK(chain == f.chain);
  }
}

TEST_CASE("JSON lines assertion") {
  FactStore s;
  std::string jsonl =
      R"({"fact":{"subject":"John Doe","predicate":"joined","object":"XML Corp","event_time":"2001-10-10"},)"
      R"("chain":[{"agent":"Le Monde","kind":"published","time":"2006-03-04"},)"
      R"({"agent":"Ann Onymous","kind":"learned","time":"2008-01-01"}]})"
      "\n\n";
  auto got = assert_jsonl(s, jsonl);
  REQUIRE(got.size() == 1);
  CHECK(s.all()[0].fact == john());
  CHECK(s.all()[0].chain == ann_chain());

  try {
    assert_jsonl(s, jsonl + "{\"fact\":{}}\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("readers see a consistent prefix during writes") {
  FactStore s;
  std::atomic<bool> ok{true};
  std::thread writer([&] {
    for (int i = 0; i < 500; ++i) {
      s.assert_fact({"s", "p", std::to_string(i), {}}, {{"A", AttributionKind::observed, make_timestamp(2001, 1, 1)}});
    }
  });
  std::thread reader([&] {
    for (int i = 0; i < 200; ++i) {
      auto all = s.all();
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (all[k].fact.object != std::to_string(k)) ok = false;
      }
    }
  });
  writer.join();
  reader.join();
  CHECK(ok);
  CHECK(s.size() == 500);
}
