#include "liststand/provenance.hpp"

#include "liststand/error.hpp"
#include "liststand/text.hpp"
#include "liststand/warehouse.hpp"

#include <mutex>

namespace liststand {
namespace {

using json = nlohmann::json;

Timestamp parse_time_or_throw(const std::string& s) {
  auto t = parse_iso8601(s);
  if (!t) throw Error(ErrorCode::invalid_argument, "invalid timestamp: " + s);
  return *t;
}

}  // namespace

const char* to_string(AttributionKind kind) {
  switch (kind) {
    case AttributionKind::published: return "published";
    case AttributionKind::learned: return "learned";
    case AttributionKind::observed: return "observed";
  }
  return "observed";
}

AttributionKind parse_attribution_kind(std::string_view s) {
  if (s == "published") return AttributionKind::published;
  if (s == "learned") return AttributionKind::learned;
  if (s == "observed") return AttributionKind::observed;
  throw Error(ErrorCode::invalid_argument, "unknown attribution kind: " + std::string(s));
}

FactStore::FactStore(const FactStore& other) {
  std::shared_lock lock(other.mutex_);
  facts_ = other.facts_;
}

FactStore& FactStore::operator=(const FactStore& other) {
  if (this != &other) {
    auto copy = other.all();
    std::unique_lock lock(mutex_);
    facts_ = std::move(copy);
  }
  return *this;
}

FactId FactStore::assert_fact(Fact fact, std::vector<Attribution> chain, ChainPolicy policy) {
  if (fact.subject.empty() || fact.predicate.empty() || fact.object.empty()) {
    throw Error(ErrorCode::rejected, "fact subject, predicate and object must be non-empty");
  }
  if (chain.empty()) throw Error(ErrorCode::rejected, "empty attribution chain");
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain[i].agent.empty()) throw Error(ErrorCode::rejected, "attribution with empty agent");
    if (i > 0 && chain[i].time < chain[i - 1].time) throw Error(ErrorCode::rejected, "non-monotone attribution chain");
  }
  if (policy == ChainPolicy::researcher && chain.back().kind == AttributionKind::published) {
    throw Error(ErrorCode::rejected, "outermost attribution of a researcher entry must be learned or observed");
  }
  std::unique_lock lock(mutex_);
  FactId id = static_cast<FactId>(facts_.size());
  facts_.push_back({id, std::move(fact), std::move(chain)});
  return id;
}

template <typename Pred>
std::vector<SourcedFact> FactStore::select(Pred pred) const {
  std::shared_lock lock(mutex_);
  std::vector<SourcedFact> out;
  for (const auto& f : facts_) {
    if (pred(f)) out.push_back(f);
  }
  return out;
}

std::vector<SourcedFact> FactStore::known_by(std::string_view agent, Timestamp as_of) const {
  return select([&](const SourcedFact& f) { return f.outermost().agent == agent && f.outermost().time <= as_of; });
}

std::vector<SourcedFact> FactStore::via_source(std::string_view agent) const {
  return select([&](const SourcedFact& f) {
    for (const auto& a : f.chain) {
      if (a.agent == agent) return true;
    }
    return false;
  });
}

std::vector<SourcedFact> FactStore::events_between(Timestamp from, Timestamp to) const {
  if (from > to) throw Error(ErrorCode::invalid_argument, "events_between: start after end");
  return select([&](const SourcedFact& f) {
    return f.fact.event_time && *f.fact.event_time >= from && *f.fact.event_time <= to;
  });
}

std::vector<SourcedFact> FactStore::all() const {
  return select([](const SourcedFact&) { return true; });
}

std::size_t FactStore::size() const {
  std::shared_lock lock(mutex_);
  return facts_.size();
}

void FactStore::save_to(Warehouse& warehouse, const std::string& collection) const {
  if (!warehouse.has_collection(collection)) warehouse.create_collection(collection);
  std::vector<TreeNode> docs;
  for (const auto& f : all()) docs.push_back(fact_to_tree(f));
  auto snap = warehouse.snapshot(collection);
  // append-only: only facts not yet stored are written
  if (snap.size() > docs.size()) throw Error(ErrorCode::rejected, "fact collection holds more facts than the store");
  docs.erase(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(snap.size()));
  if (!docs.empty()) warehouse.store_all(collection, std::move(docs));
}

FactStore FactStore::load_from(const Warehouse& warehouse, const std::string& collection) {
  FactStore store;
  if (!warehouse.has_collection(collection)) return store;
  auto snap = warehouse.snapshot(collection);
  for (const auto& doc : snap.documents) {
    SourcedFact f = fact_from_tree(*doc);
    if (f.fact_id != static_cast<FactId>(store.facts_.size())) {
      throw Error(ErrorCode::io, "fact collection out of sequence at id " + std::to_string(f.fact_id));
    }
    store.facts_.push_back(std::move(f));
  }
  return store;
}

TreeNode fact_to_tree(const SourcedFact& f) {
  TreeNode node("fact");
  node.set("id", std::to_string(f.fact_id));
  node.add(TreeNode::leaf("subject", f.fact.subject));
  node.add(TreeNode::leaf("predicate", f.fact.predicate));
  node.add(TreeNode::leaf("object", f.fact.object));
  if (f.fact.event_time) node.add(TreeNode::leaf("event_time", format_iso8601(*f.fact.event_time)));
  TreeNode& chain = node.add(TreeNode("chain"));
  for (const auto& a : f.chain) {
    TreeNode link("attribution");
    link.set("agent", a.agent).set("kind", to_string(a.kind)).set("time", format_iso8601(a.time));
    chain.add(std::move(link));
  }
  return node;
}

SourcedFact fact_from_tree(const TreeNode& node) {
  auto need = [&](std::string_view name) {
    auto v = node.child_text(name);
    if (!v) throw Error(ErrorCode::invalid_argument, "fact document lacks <" + std::string(name) + ">");
    return *v;
  };
  SourcedFact f;
  auto id = node.attributes.find("id");
  if (id == node.attributes.end() || !text::is_integer(id->second)) {
    throw Error(ErrorCode::invalid_argument, "fact document lacks a numeric id");
  }
  f.fact_id = std::stoll(id->second);
  f.fact.subject = need("subject");
  f.fact.predicate = need("predicate");
  f.fact.object = need("object");
  if (auto t = node.child_text("event_time")) f.fact.event_time = parse_time_or_throw(*t);
  if (const TreeNode* chain = node.child("chain")) {
    for (const auto& link : chain->children) {
      Attribution a;
      a.agent = link.attributes.at("agent");
      a.kind = parse_attribution_kind(link.attributes.at("kind"));
      a.time = parse_time_or_throw(link.attributes.at("time"));
      f.chain.push_back(std::move(a));
    }
  }
  return f;
}

json fact_to_json(const SourcedFact& f) {
  json fact = {{"subject", f.fact.subject}, {"predicate", f.fact.predicate}, {"object", f.fact.object}};
  fact["event_time"] = f.fact.event_time ? json(format_iso8601(*f.fact.event_time)) : json(nullptr);
  json chain = json::array();
  for (const auto& a : f.chain) {
    chain.push_back({{"agent", a.agent}, {"kind", to_string(a.kind)}, {"time", format_iso8601(a.time)}});
  }
  return {{"fact_id", f.fact_id}, {"fact", std::move(fact)}, {"chain", std::move(chain)}};
}

std::pair<Fact, std::vector<Attribution>> fact_entry_from_json(const json& j) {
  try {
    const json& jf = j.at("fact");
    Fact fact{jf.at("subject").get<std::string>(), jf.at("predicate").get<std::string>(),
              jf.at("object").get<std::string>(), std::nullopt};
    if (jf.contains("event_time") && !jf["event_time"].is_null()) {
      fact.event_time = parse_time_or_throw(jf["event_time"].get<std::string>());
    }
    std::vector<Attribution> chain;
    for (const auto& ja : j.at("chain")) {
      chain.push_back({ja.at("agent").get<std::string>(), parse_attribution_kind(ja.at("kind").get<std::string>()),
                       parse_time_or_throw(ja.at("time").get<std::string>())});
    }
    return {std::move(fact), std::move(chain)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid fact entry: ") + e.what());
  }
}

std::vector<FactId> assert_jsonl(FactStore& store, std::string_view jsonl) {
  std::vector<FactId> ids;
  std::size_t line_no = 0;
  for (const auto& line : text::split(jsonl, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto [fact, chain] = fact_entry_from_json(json::parse(line));
      ids.push_back(store.assert_fact(std::move(fact), std::move(chain), ChainPolicy::researcher));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::invalid_argument, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ids;
}

}  // namespace liststand
