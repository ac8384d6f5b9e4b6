#include "liststand/error.hpp"
#include "liststand/identity.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace liststand;

namespace {

Message from(const std::string& id, const std::string& addr, std::optional<std::string> display = std::nullopt) {
  Message m = support::make_message(id, addr, make_timestamp(2002, 1, 1));
  m.from_display = std::move(display);
  return m;
}

// partition as a set of address sets
std::set<std::set<std::string>> partition(const EntityCatalog& c) {
  std::set<std::set<std::string>> out;
  for (const auto& e : c.entities()) {
    std::set<std::string> s;
    for (const auto& a : e.addresses) s.insert(a.to_string());
    out.insert(s);
  }
  return out;
}

}  // namespace

TEST_CASE("normalize_address") {
  Address a = normalize_address("\"John Doe\" <John.Doe+w3c@IBM.COM>");
  CHECK(a.local == "john.doe");
  CHECK(a.domain == "ibm.com");
  CHECK(a.display_norm == "john doe");

  Address b = normalize_address("a@b.org");
  CHECK(b.local == "a");
  CHECK(b.domain == "b.org");
  CHECK(!b.display_norm);

  try {
    normalize_address("nobody");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
    CHECK(std::string(e.what()) == "unparseable address");
  }

  CHECK(normalize_address("x@Host.Example.").domain == "host.example");
  CHECK(normalize_address("x+tag@y.org", false).local == "x+tag");
  CHECK(normalize_address("jd@a.com (John Doe)").to_string() == "jd@a.com");
  CHECK(extract_display_name("jd@a.com (John Doe)") == "John Doe");
}

TEST_CASE("extract_domain is verbatim") {
  CHECK(extract_domain(Address{"x", "cogsci.ed.ac.uk", {}}) == "cogsci.ed.ac.uk");
  CHECK(extract_domain(Address{"y", "w3.org", {}}) == "w3.org");
  CHECK(extract_domain(normalize_address("z@B.ORG")) == "b.org");
}

TEST_CASE("normalize_display") {
  CHECK(normalize_display("  Doe, John  ") == "doe john");
  CHECK(!normalize_display(" ,. "));
}

TEST_CASE("map_institution") {
  auto one = InstitutionMap::parse_csv("*.ibm.com,ibm.com\n");
  CHECK(map_institution("us.ibm.com", one) == "ibm.com");
  CHECK(map_institution("ibm.com", one) == "ibm.com");  // unmatched, maps to itself
  auto m = InstitutionMap::parse_csv("# comment\n\n*.ibm.com,IBM\n");
  CHECK(map_institution("ibm.com", m) == "ibm.com");
  CHECK(map_institution("xibm.com", m) == "xibm.com");
  CHECK(map_institution("oracle.com", {}) == "oracle.com");
  CHECK(map_institution("mhk.me.uk", m) == "mhk.me.uk");
  auto first_wins = InstitutionMap::parse_csv("a.org,First\na.org,Second\n");
  CHECK(map_institution("a.org", first_wins) == "First");
}

TEST_CASE("R2 merges shared display names") {
  std::vector<Message> ms = {from("1@x", "jd@a.com", "John Doe"), from("2@x", "john@b.org", "John Doe")};
  auto c = resolve_entities(ms);
  REQUIRE(c.size() == 1);
  const Entity& e = c.entities()[0];
  CHECK(e.addresses.size() == 2);
  REQUIRE(e.evidence.size() == 1);
  CHECK(e.evidence[0].rule == "R2");
  CHECK(e.key() == "jd@a.com");
  CHECK(e.canonical_name == "John Doe");

  ResolveConfig off;
  off.r2 = false;
  CHECK(resolve_entities(ms, off).size() == 2);
}

TEST_CASE("R2 guard rejects short names") {
  CHECK(resolve_entities({from("1@x", "ed@a.com", "Ed"), from("2@x", "ed@b.org", "Ed")}).size() == 2);
  // two tokens but under seven characters
  CHECK(resolve_entities({from("1@x", "a@a.com", "Al Bo"), from("2@x", "b@b.org", "Al Bo")}).size() == 2);
}

TEST_CASE("R3 merges local parts within an institution") {
  ResolveConfig cfg = ResolveConfig::from_rule_list("r1,r3");
  cfg.institutions = InstitutionMap::parse_csv("*.ibm.com,IBM\nibm.com,IBM\n");
  std::vector<Message> ms = {from("1@x", "jsmith@us.ibm.com"), from("2@x", "jsmith@ibm.com"),
                             from("3@x", "jsmith@oracle.com"), from("4@x", "bob@us.ibm.com"),
                             from("5@x", "bob@ibm.com")};
  auto c = resolve_entities(ms, cfg);
  CHECK(c.size() == 4);
  CHECK(c.entity_of_address("jsmith@us.ibm.com") == c.entity_of_address("jsmith@ibm.com"));
  CHECK(c.entity_of_address("jsmith@oracle.com") != c.entity_of_address("jsmith@ibm.com"));
  CHECK(c.entity_of_address("bob@ibm.com") != c.entity_of_address("bob@us.ibm.com"));
  CHECK(resolve_entities(ms).size() == 5);
}

TEST_CASE("rule list parsing") {
  auto cfg = ResolveConfig::from_rule_list("r1");
  CHECK(!cfg.r2);
  CHECK(!cfg.r3);
  cfg = ResolveConfig::from_rule_list("R1,R2,R3");
  CHECK(cfg.r2);
  CHECK(cfg.r3);
  CHECK_THROWS_AS(ResolveConfig::from_rule_list("r9"), Error);
}

TEST_CASE("entity_of names an unknown address") {
  EntityCatalog c = resolve_entities({from("1@x", "a@b.org")});
  CHECK(c.entity_of(from("1@x", "a@b.org")) == c.entities()[0].entity_id);
  try {
    c.entity_of(from("2@x", "q@b.org"));
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
    CHECK(std::string(e.what()).find("q@b.org") != std::string::npos);
  }
  CHECK(resolve_entities({}).size() == 0);
}

TEST_CASE("resolution invariants on random fixtures") {
  support::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto ms = support::analytics_fixture(rng, 60);
    ResolveConfig r1_only = ResolveConfig::from_rule_list("r1");
    auto base = resolve_entities(ms, r1_only);
    auto c = resolve_entities(ms);
    ResolveConfig all = ResolveConfig::from_rule_list("r1,r2,r3");
    auto wide = resolve_entities(ms, all);

    std::set<std::string> observed;
    for (const auto& m : ms) observed.insert(m.from_address);
    // partition: disjoint and covering
    std::size_t total = 0;
    std::set<std::string> covered;
    for (const auto& e : c.entities()) {
      total += e.addresses.size();
      for (const auto& a : e.addresses) covered.insert(a.to_string());
    }
    CHECK(total == covered.size());
    CHECK(covered == observed);
    // monotone in rules
    CHECK(wide.size() <= c.size());
    CHECK(c.size() <= base.size());
    CHECK(c.size() <= observed.size());
    CHECK(observed.size() <= ms.size());
    // merge evidence connects each entity
    for (const auto& e : c.entities()) {
      std::map<std::string, std::string> up;
      std::function<std::string(const std::string&)> find = [&](const std::string& x) {
        auto it = up.find(x);
        if (it == up.end() || it->second == x) return x;
        return it->second = find(it->second);
      };
      for (const auto& ev : e.evidence) up[find(ev.a)] = find(ev.b);
      std::set<std::string> roots;
      for (const auto& a : e.addresses) roots.insert(find(a.to_string()));
      CHECK(roots.size() == 1);
    }
    // order-insensitive, ids included
    auto shuffled = ms;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto again = resolve_entities(shuffled);
    CHECK(again == c);
    CHECK(partition(again) == partition(c));
  }
}
