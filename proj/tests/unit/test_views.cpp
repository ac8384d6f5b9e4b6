#include "liststand/error.hpp"
#include "liststand/message_io.hpp"
#include "liststand/views.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace liststand;

namespace {

Operand var(std::string v, std::optional<std::string> path = std::nullopt) {
  Operand o;
  o.var = std::move(v);
  if (path) o.path = parse_path(*path);
  return o;
}

void fill(Warehouse& w, std::size_t n, unsigned seed) {
  support::Rng rng(seed);
  w.create_collection("people", support::people_schema());
  for (auto& d : support::people_documents(rng, n)) w.store("people", d);
}

// V1: one <who> per person with name and dept attribute copied
QuerySpec v1_spec() {
  QuerySpec s;
  s.source = "people";
  s.bindings = {{"p", std::nullopt, parse_path("person")}};
  s.result = TemplateNode::element("who", {TemplateNode::element("name", {TemplateNode::value(var("p", "name"))}),
                                           TemplateNode::element("age", {TemplateNode::value(var("p", "age"))})});
  return s;
}

// V2 over V1: count per name
QuerySpec v2_spec(const std::string& source) {
  QuerySpec s;
  s.source = source;
  s.bindings = {{"w", std::nullopt, parse_path("who")}};
  s.group_by = {var("w", "name")};
  s.result = TemplateNode::element("g", {TemplateNode::element("k", {TemplateNode::key(0)}),
                                         TemplateNode::element("n", {TemplateNode::aggregate(AggregateFn::count, var("w"))})});
  return s;
}

ResolvedSource as_source(const std::vector<TreeNode>& docs, std::optional<SchemaDef> schema) {
  ResolvedSource r;
  for (const auto& d : docs) r.documents.push_back(std::make_shared<const TreeNode>(d));
  r.schema = std::move(schema);
  return r;
}

std::vector<TreeNode> docs_of(const ResolvedSource& r) {
  std::vector<TreeNode> out;
  for (const auto& d : r.documents) out.push_back(*d);
  return out;
}

}  // namespace

TEST_CASE("two-level composition equals two manual passes") {
  for (bool m1 : {false, true}) {
    for (bool m2 : {false, true}) {
      Warehouse w;
      fill(w, 40, 3);
      ViewRegistry reg(w);
      reg.register_view("v1", v1_spec(), m1);
      reg.register_view("v2", v2_spec("v1"), m2);
      auto first = evaluate(v1_spec(), w);
      auto manual = evaluate(v2_spec("v1"), as_source(first, infer_result_schema(v1_spec(), support::people_schema())));
      CHECK(docs_of(reg.resolve("v2")) == manual);
      CHECK(evaluate(v2_spec("v1"), reg) == manual);
    }
  }
}

TEST_CASE("cycles and duplicates") {
  Warehouse w;
  fill(w, 3, 1);
  ViewRegistry reg(w);
  QuerySpec self = v1_spec();
  self.source = "loop";
  try {
    reg.register_view("loop", self, false);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::rejected);
    CHECK(std::string(e.what()) == "cyclic view definition");
  }
  reg.register_view("v1", v1_spec(), false);
  CHECK_THROWS_WITH_AS(reg.register_view("v1", v1_spec(), true), doctest::Contains("v1"), Error);
  try {
    reg.register_view("people", v1_spec(), false);
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::conflict);
  }
  QuerySpec missing = v1_spec();
  missing.source = "nothing";
  try {
    reg.register_view("m", missing, false);
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
  }
  CHECK(!reg.has_view("loop"));
  CHECK(!reg.has_view("m"));
}

TEST_CASE("stale materialized views are reported and refreshed on request") {
  Warehouse w;
  fill(w, 5, 2);
  ViewRegistry reg(w);
  auto def = reg.register_view("mv", v1_spec(), true);
  CHECK(def.version_built_at == w.version("people"));
  CHECK(!reg.is_stale("mv"));
  CHECK(w.has_collection("mv"));
  CHECK(w.snapshot("mv").size() == 5);

  support::Rng rng(9);
  w.store("people", support::people_documents(rng, 1)[0]);
  CHECK(reg.is_stale("mv"));
  // stale content is served as built
  CHECK(reg.resolve("mv").documents.size() == 5);
  auto statuses = reg.list();
  REQUIRE(statuses.size() == 1);
  CHECK(statuses[0].stale);

  reg.refresh("mv");
  CHECK(!reg.is_stale("mv"));
  CHECK(reg.resolve("mv").documents.size() == 6);
  CHECK_THROWS_AS(reg.refresh("nope"), Error);

  reg.register_view("virt", v1_spec(), false);
  CHECK(!reg.is_stale("virt"));
  CHECK(reg.effective_version("virt") == w.version("people"));
}

TEST_CASE("stale propagates through a virtual layer over a materialized view") {
  Warehouse w;
  fill(w, 5, 2);
  ViewRegistry reg(w);
  reg.register_view("mv", v1_spec(), true);
  reg.register_view("top", v2_spec("mv"), true);
  CHECK(!reg.is_stale("top"));
  reg.refresh("mv");  // rebuilding bumps mv's version
  CHECK(reg.is_stale("top"));
}

TEST_CASE("materialized equals virtual on random specs") {
  support::Rng rng(12);
  Warehouse w;
  fill(w, 30, 4);
  ViewRegistry reg(w);
  for (int i = 0; i < 30; ++i) {
    QuerySpec s = support::random_spec(rng, "people");
    std::string n = "v" + std::to_string(i);
    reg.register_view(n + "m", s, true);
    reg.register_view(n + "v", s, false);
    CHECK(docs_of(reg.resolve(n + "m")) == docs_of(reg.resolve(n + "v")));
    CHECK(reg.source_schema(n + "m") == reg.source_schema(n + "v"));
  }
}

TEST_CASE("registry persists with the warehouse") {
  support::TempDir dir;
  {
    Warehouse w(dir.path);
    fill(w, 4, 5);
    ViewRegistry reg(w);
    reg.register_view("mv", v1_spec(), true);
    reg.register_view("vv", v2_spec("mv"), false);
    w.persist();
  }
  Warehouse w(dir.path);
  ViewRegistry reg(w);
  CHECK(reg.has_view("mv"));
  CHECK(reg.get("vv").spec == v2_spec("mv"));
  CHECK(!reg.is_stale("mv"));
  CHECK(reg.resolve("vv").documents.size() > 0);
  CHECK(view_from_json(view_to_json(reg.get("mv"))) == reg.get("mv"));
}
