#include "liststand/analytics.hpp"

#include "liststand/error.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace liststand {
namespace {

std::string domain_of(const std::string& address) {
  auto at = address.rfind('@');
  return at == std::string::npos ? address : address.substr(at + 1);
}

RankedTable from_counts(std::vector<std::string> names, const std::map<std::string, std::vector<std::int64_t>>& counts) {
  RankedTable t;
  t.value_names = std::move(names);
  for (const auto& [k, v] : counts) t.rows.push_back({k, v});
  t.sort();
  return t;
}

std::vector<EntityId> senders(const std::vector<Message>& messages, const EntityCatalog& catalog) {
  std::vector<EntityId> out;
  out.reserve(messages.size());
  for (const auto& m : messages) out.push_back(catalog.entity_of(m));
  return out;
}

}  // namespace

void RankedTable::sort() {
  std::stable_sort(rows.begin(), rows.end(), [](const RankedRow& x, const RankedRow& y) {
    std::int64_t a = x.values.empty() ? 0 : x.values.front();
    std::int64_t b = y.values.empty() ? 0 : y.values.front();
    if (a != b) return a > b;
    return x.key < y.key;
  });
}

RankedTable RankedTable::top(std::size_t k) const {
  RankedTable t = *this;
  if (t.rows.size() > k) t.rows.resize(k);
  return t;
}

RankedTable RankedTable::anonymized() const {
  RankedTable t = *this;
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].key = std::to_string(i + 1) + ".";
  return t;
}

RankedTable posts_per_entity(const std::vector<Message>& messages, const EntityCatalog& catalog) {
  std::map<EntityId, std::int64_t> counts;
  for (EntityId e : senders(messages, catalog)) ++counts[e];
  std::map<std::string, std::vector<std::int64_t>> rows;
  for (const auto& [e, n] : counts) rows[catalog.find(e)->key()] = {n};
  return from_counts({"posts"}, rows);
}

RankedTable posts_per_domain(const std::vector<Message>& messages, const InstitutionMap& institutions) {
  std::map<std::string, std::vector<std::int64_t>> rows;
  for (const auto& m : messages) {
    auto& v = rows[map_institution(domain_of(m.from_address), institutions)];
    if (v.empty()) v = {0};
    ++v[0];
  }
  return from_counts({"posts"}, rows);
}

RankedTable posters_per_domain(const std::vector<Message>& messages, const EntityCatalog& catalog,
                               const InstitutionMap& institutions) {
  std::map<std::string, std::set<EntityId>> posters;
  std::map<std::string, std::int64_t> posts;
  auto ids = senders(messages, catalog);
  for (std::size_t i = 0; i < messages.size(); ++i) {
    std::string d = map_institution(domain_of(messages[i].from_address), institutions);
    posters[d].insert(ids[i]);
    ++posts[d];
  }
  std::map<std::string, std::vector<std::int64_t>> rows;
  for (const auto& [d, set] : posters) rows[d] = {static_cast<std::int64_t>(set.size()), posts[d]};
  return from_counts({"posters", "posts"}, rows);
}

void SocialGraph::sort() {
  std::sort(nodes.begin(), nodes.end(), [](const GraphNode& x, const GraphNode& y) { return x.id < y.id; });
  std::sort(edges.begin(), edges.end(),
            [](const GraphEdge& x, const GraphEdge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
}

void SocialGraph::check() const {
  std::set<EntityId> ids;
  for (const auto& n : nodes) {
    if (!ids.insert(n.id).second) throw Error(ErrorCode::invalid_argument, "duplicate node " + std::to_string(n.id));
  }
  std::set<std::pair<EntityId, EntityId>> seen;
  for (const auto& e : edges) {
    std::string what = std::to_string(e.a) + "-" + std::to_string(e.b);
    if (e.a >= e.b) throw Error(ErrorCode::invalid_argument, "edge endpoints must satisfy a < b: " + what);
    if (!ids.count(e.a) || !ids.count(e.b)) throw Error(ErrorCode::invalid_argument, "dangling edge " + what);
    if (e.weight < 1) throw Error(ErrorCode::invalid_argument, "non-positive weight on " + what);
    if (!seen.emplace(e.a, e.b).second) throw Error(ErrorCode::invalid_argument, "duplicate edge " + what);
  }
}

SocialGraph coparticipation_graph(const std::vector<Message>& messages, const ThreadForest& forest,
                                  const EntityCatalog& catalog, const GraphOptions& options) {
  auto ids = senders(messages, catalog);
  SocialGraph g;
  std::set<EntityId> posting(ids.begin(), ids.end());
  for (EntityId id : posting) {
    const Entity& e = *catalog.find(id);
    g.nodes.push_back({id, e.canonical_name.value_or(e.key()),
                       map_institution(extract_domain(e.addresses.front()), options.institutions)});
  }
  std::map<std::pair<EntityId, EntityId>, std::int64_t> weights;
  for (std::size_t root : forest.roots()) {
    std::map<EntityId, std::int64_t> posts;
    for (std::size_t n : forest.thread_members(root)) ++posts[ids.at(forest.node(n).message_index)];
    for (auto a = posts.begin(); a != posts.end(); ++a) {
      for (auto b = std::next(a); b != posts.end(); ++b) {
        weights[{a->first, b->first}] +=
            options.weighting == CoparticipationWeight::threads ? 1 : a->second * b->second;
      }
    }
  }
  for (const auto& [pair, w] : weights) {
    if (w >= options.min_weight) g.edges.push_back({pair.first, pair.second, w});
  }
  return g;
}

AnsweringProfile answering_profile(EntityId subject, const std::vector<Message>& messages,
                                   const ThreadForest& forest, const EntityCatalog& catalog) {
  if (!catalog.find(subject)) throw Error(ErrorCode::not_found, "no such entity: " + std::to_string(subject));
  std::map<EntityId, ProfileRow> rows;
  for (const auto& e : reply_edges(forest, entity_lookup(messages, catalog))) {
    if (e.parent_entity == e.child_entity) continue;
    if (e.child_entity == subject) {
      rows[e.parent_entity].other = e.parent_entity;
      ++rows[e.parent_entity].replies_to_other;
    } else if (e.parent_entity == subject) {
      rows[e.child_entity].other = e.child_entity;
      ++rows[e.child_entity].replies_from_other;
    }
  }
  AnsweringProfile p;
  p.subject = subject;
  for (auto& [id, r] : rows) p.rows.push_back(r);
  std::stable_sort(p.rows.begin(), p.rows.end(), [](const ProfileRow& x, const ProfileRow& y) {
    auto tx = x.replies_to_other + x.replies_from_other;
    auto ty = y.replies_to_other + y.replies_from_other;
    if (tx != ty) return tx > ty;
    return x.other < y.other;
  });
  return p;
}

std::vector<RecommendationRow> recommendation_table(const FactStore& facts, const InstitutionMap& institutions) {
  struct Affiliation {
    std::optional<Timestamp> time;
    std::string institution;
  };
  struct Authored {
    std::string person;
    std::string kind;
    std::string document;
    std::optional<Timestamp> time;
  };
  std::map<std::string, std::vector<Affiliation>> affiliations;
  std::map<std::string, std::string> types;
  std::vector<Authored> authored;
  for (const auto& sf : facts.all()) {
    const Fact& f = sf.fact;
    if (f.predicate == "affiliated_with") {
      affiliations[f.subject].push_back({f.event_time, map_institution(f.object, institutions)});
    } else if (f.predicate == "institution_type") {
      types[f.subject] = f.object;
    } else if (f.predicate == "authored") {
      auto colon = f.object.find(':');
      if (colon == std::string::npos) continue;
      std::string kind = f.object.substr(0, colon);
      if (kind != "REC" && kind != "NOTE" && kind != "WD") continue;
      authored.push_back({f.subject, kind, f.object.substr(colon + 1), f.event_time});
    }
  }
  // untimed affiliations sort first, i.e. count as the earliest
  for (auto& [p, list] : affiliations) {
    std::stable_sort(list.begin(), list.end(), [](const Affiliation& x, const Affiliation& y) { return x.time < y.time; });
  }
  auto institution_of = [&](const Authored& a) -> std::string {
    auto it = affiliations.find(a.person);
    if (it == affiliations.end()) return "Unknown";
    const auto& list = it->second;
    const Affiliation* chosen = &list.front();
    if (a.time) {
      for (const auto& af : list) {
        if (af.time && *af.time <= *a.time) chosen = &af;
      }
    }
    return chosen->institution;
  };

  struct Acc {
    std::set<std::string> people;
    std::map<std::string, std::set<std::string>> docs;
  };
  std::map<std::string, Acc> acc;
  for (const auto& a : authored) {
    Acc& x = acc[institution_of(a)];
    x.people.insert(a.person);
    x.docs[a.kind].insert(a.document);
  }
  std::vector<RecommendationRow> rows;
  for (auto& [inst, x] : acc) {
    RecommendationRow r;
    r.institution = inst;
    auto t = types.find(inst);
    r.type = t != types.end() ? t->second : "n.a.";
    r.individuals = static_cast<std::int64_t>(x.people.size());
    r.rec = static_cast<std::int64_t>(x.docs["REC"].size());
    r.notes = static_cast<std::int64_t>(x.docs["NOTE"].size());
    r.drafts = static_cast<std::int64_t>(x.docs["WD"].size());
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RecommendationRow& x, const RecommendationRow& y) {
    if (x.rec != y.rec) return x.rec > y.rec;
    return x.institution < y.institution;
  });
  return rows;
}

}  // namespace liststand
