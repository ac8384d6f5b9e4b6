#include "support.hpp"

#include "liststand/error.hpp"
#include "liststand/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <functional>

namespace support {

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

Message make_message(std::string id, std::string from, Timestamp date, std::optional<std::string> in_reply_to,
                     std::vector<std::string> references, std::string subject) {
  Message m;
  m.message_id = std::move(id);
  m.from_address = std::move(from);
  m.date = date;
  m.in_reply_to = std::move(in_reply_to);
  m.references = std::move(references);
  m.subject_raw = subject;
  m.subject_norm = std::move(subject);
  m.source_id = "fixture";
  return m;
}

PlantedCorpus planted_corpus(Rng& rng, std::size_t max_messages, double dangling_rate) {
  PlantedCorpus pc;
  const std::size_t n = uniform(rng, 1, max_messages);
  const std::size_t people = uniform(rng, 2, 10);
  Timestamp t = make_timestamp(2002, 4, 2, 0, 0, 0);
  std::vector<std::string> ids;
  std::vector<std::optional<std::size_t>> parent(n);
  std::size_t ghost = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("m" + std::to_string(i) + "@gen.test");
    if (i > 0 && !chance(rng, 0.2)) parent[i] = uniform(rng, 0, i - 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    t += std::chrono::seconds(uniform(rng, 0, 3600));
    std::string from = "user" + std::to_string(uniform(rng, 0, people - 1)) + "@dom" + std::to_string(i % 3) + ".test";
    Message m = make_message(ids[i], from, t);
    m.offset = i;
    std::optional<std::string> planted;
    if (parent[i]) {
      std::vector<std::string> chain;  // ancestors, root first, ending at the parent
      for (auto a = parent[i]; a && chain.size() < 4; a = parent[*a]) chain.insert(chain.begin(), ids[*a]);
      switch (uniform(rng, 0, 2)) {
        case 0: m.in_reply_to = ids[*parent[i]]; m.references = chain; break;
        case 1: m.references = chain; break;
        default: m.in_reply_to = ids[*parent[i]]; break;
      }
      planted = ids[*parent[i]];
    }
    if (chance(rng, dangling_rate)) {
      ++pc.dangling;
      std::string g = "ghost" + std::to_string(ghost++) + "@gen.test";
      switch (parent[i] ? uniform(rng, 0, 2) : 2) {
        case 0: m.references.push_back(g); break;  // stray id after the real ones
        case 1:
          m.in_reply_to = g;
          if (m.references.empty() || m.references.back() != *planted) m.references.push_back(*planted);
          break;
        default:  // the parent itself is missing from the archive
          m.in_reply_to = g;
          m.references = {g};
          planted.reset();
      }
    }
    pc.parent[ids[i]] = planted;
    pc.sender[ids[i]] = from;
    pc.messages.push_back(std::move(m));
  }
  std::shuffle(pc.messages.begin(), pc.messages.end(), rng);
  return pc;
}

std::map<std::string, std::optional<std::string>> forest_parents(const ThreadForest& forest) {
  std::map<std::string, std::optional<std::string>> out;
  for (const auto& n : forest.nodes()) {
    out[n.message_id] = n.parent ? std::optional(forest.node(*n.parent).message_id) : std::nullopt;
  }
  return out;
}

std::vector<DiscussionPair> brute_discussions(const std::map<std::string, std::optional<std::string>>& parent,
                                              const std::map<std::string, EntityId>& entity, std::size_t threshold,
                                              bool per_thread) {
  auto root_of = [&](std::string id) {
    while (parent.at(id)) id = *parent.at(id);
    return id;
  };
  std::set<EntityId> people;
  for (const auto& [m, e] : entity) people.insert(e);
  std::set<std::string> threads;
  for (const auto& [m, p] : parent) threads.insert(root_of(m));

  // count(a, b, thread set): links whose parent is a's and child is b's
  auto count = [&](EntityId a, EntityId b, const std::function<bool(const std::string&)>& in_scope) {
    std::size_t c = 0;
    for (const auto& [child, p] : parent) {
      if (p && entity.at(*p) == a && entity.at(child) == b && in_scope(root_of(child))) ++c;
    }
    return c;
  };

  std::vector<DiscussionPair> out;
  for (EntityId a : people) {
    for (EntityId b : people) {
      if (a >= b) continue;
      DiscussionPair d{a, b, 0, 0, {}};
      if (per_thread) {
        for (const auto& t : threads) {
          auto here = [&](const std::string& r) { return r == t; };
          std::size_t ab = count(a, b, here), ba = count(b, a, here);
          if (ab >= threshold && ba >= threshold) {
            d.edges_ab += ab;
            d.edges_ba += ba;
            d.threads.insert(t);
          }
        }
        if (!d.threads.empty()) out.push_back(d);
      } else {
        auto any = [](const std::string&) { return true; };
        d.edges_ab = count(a, b, any);
        d.edges_ba = count(b, a, any);
        if (d.edges_ab < threshold || d.edges_ba < threshold) continue;
        for (const auto& [child, p] : parent) {
          if (!p) continue;
          auto pe = entity.at(*p), ce = entity.at(child);
          if ((pe == a && ce == b) || (pe == b && ce == a)) d.threads.insert(root_of(child));
        }
        out.push_back(d);
      }
    }
  }
  return out;
}

std::vector<Message> analytics_fixture(Rng& rng, std::size_t max_messages) {
  static const std::vector<std::string> names = {"Alice Smith", "Bruno Latour", "Chen Wei Ling", "Dana Scully",
                                                 "Ed", "Fox Mulder", "Grace Hopper", "Hal", "Ida Lovelace",
                                                 "Jan de Vries", "Karl Popper", "Lin"};
  static const std::vector<std::string> domains = {"ibm.com", "us.ibm.com", "w3.org", "yahoo.com", "cogsci.ed.ac.uk",
                                                   "oracle.com"};
  struct Person {
    std::vector<std::pair<std::string, std::optional<std::string>>> addresses;
  };
  std::vector<Person> people(uniform(rng, 1, names.size()));
  for (std::size_t p = 0; p < people.size(); ++p) {
    std::size_t k = uniform(rng, 1, 3);
    for (std::size_t a = 0; a < k; ++a) {
      std::string addr = "p" + std::to_string(p) + "x" + std::to_string(a) + "@" + domains[uniform(rng, 0, domains.size() - 1)];
      std::optional<std::string> display;
      if (!chance(rng, 0.2)) display = names[p];
      people[p].addresses.push_back({addr, display});
    }
  }
  std::size_t n = uniform(rng, 0, max_messages);
  std::vector<Message> out;
  Timestamp t = make_timestamp(2003, 1, 1, 0, 0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Person& who = people[uniform(rng, 0, people.size() - 1)];
    const auto& [addr, display] = who.addresses[uniform(rng, 0, who.addresses.size() - 1)];
    t += std::chrono::minutes(uniform(rng, 1, 90));
    std::optional<std::string> reply;
    if (i > 0 && chance(rng, 0.7)) reply = out[uniform(rng, 0, i - 1)].message_id;
    Message m = make_message("a" + std::to_string(i) + "@fixture", addr, t, reply);
    m.from_display = display;
    m.offset = i;
    out.push_back(std::move(m));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

namespace {

RankedTable ranked(std::vector<std::string> names, std::map<std::string, std::vector<std::int64_t>> rows) {
  RankedTable t;
  t.value_names = std::move(names);
  for (auto& [k, v] : rows) t.rows.push_back({k, v});
  std::sort(t.rows.begin(), t.rows.end(), [](const RankedRow& a, const RankedRow& b) {
    return a.values[0] != b.values[0] ? a.values[0] > b.values[0] : a.key < b.key;
  });
  return t;
}

std::string domain_after_at(const std::string& a) { return a.substr(a.find('@') + 1); }

EntityId who(const Message& m, const EntityCatalog& catalog) { return *catalog.entity_of_address(m.from_address); }

std::map<std::string, std::string> roots_by_in_reply_to(const std::vector<Message>& ms) {
  std::map<std::string, const Message*> by_id;
  for (const auto& m : ms) by_id[m.message_id] = &m;
  std::map<std::string, std::string> root;
  for (const auto& m : ms) {
    const Message* cur = &m;
    while (cur->in_reply_to && by_id.count(*cur->in_reply_to)) cur = by_id[*cur->in_reply_to];
    root[m.message_id] = cur->message_id;
  }
  return root;
}

}  // namespace

RankedTable brute_posts_per_entity(const std::vector<Message>& ms, const EntityCatalog& catalog) {
  std::map<std::string, std::vector<std::int64_t>> rows;
  for (const auto& e : catalog.entities()) {
    std::int64_t n = 0;
    for (const auto& m : ms) n += who(m, catalog) == e.entity_id;
    if (n) rows[e.key()] = {n};
  }
  return ranked({"posts"}, rows);
}

RankedTable brute_posts_per_domain(const std::vector<Message>& ms, const InstitutionMap& map) {
  std::map<std::string, std::vector<std::int64_t>> rows;
  for (const auto& m : ms) {
    auto& v = rows[map_institution(domain_after_at(m.from_address), map)];
    if (v.empty()) v.push_back(0);
    ++v[0];
  }
  return ranked({"posts"}, rows);
}

RankedTable brute_posters_per_domain(const std::vector<Message>& ms, const EntityCatalog& catalog,
                                     const InstitutionMap& map) {
  std::set<std::string> doms;
  for (const auto& m : ms) doms.insert(map_institution(domain_after_at(m.from_address), map));
  std::map<std::string, std::vector<std::int64_t>> rows;
  for (const auto& d : doms) {
    std::set<EntityId> posters;
    std::int64_t posts = 0;
    for (const auto& m : ms) {
      if (map_institution(domain_after_at(m.from_address), map) != d) continue;
      posters.insert(who(m, catalog));
      ++posts;
    }
    rows[d] = {static_cast<std::int64_t>(posters.size()), posts};
  }
  return ranked({"posters", "posts"}, rows);
}

std::map<std::pair<EntityId, EntityId>, std::int64_t> brute_coparticipation(const std::vector<Message>& ms,
                                                                           const EntityCatalog& catalog) {
  auto root = roots_by_in_reply_to(ms);
  std::set<std::string> threads;
  for (const auto& [m, r] : root) threads.insert(r);
  std::map<std::pair<EntityId, EntityId>, std::int64_t> out;
  for (const auto& ea : catalog.entities()) {
    for (const auto& eb : catalog.entities()) {
      if (ea.entity_id >= eb.entity_id) continue;
      std::int64_t w = 0;
      for (const auto& t : threads) {
        bool a = false, b = false;
        for (const auto& m : ms) {
          if (root[m.message_id] != t) continue;
          a = a || who(m, catalog) == ea.entity_id;
          b = b || who(m, catalog) == eb.entity_id;
        }
        w += a && b;
      }
      if (w) out[{ea.entity_id, eb.entity_id}] = w;
    }
  }
  return out;
}

std::map<EntityId, std::pair<std::int64_t, std::int64_t>> brute_profile(EntityId subject, const std::vector<Message>& ms,
                                                                         const EntityCatalog& catalog) {
  std::map<std::string, const Message*> by_id;
  for (const auto& m : ms) by_id[m.message_id] = &m;
  std::map<EntityId, std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& c : ms) {
    if (!c.in_reply_to || !by_id.count(*c.in_reply_to)) continue;
    EntityId ce = who(c, catalog), pe = who(*by_id[*c.in_reply_to], catalog);
    if (ce == pe) continue;
    if (ce == subject) ++out[pe].first;
    if (pe == subject) ++out[ce].second;
  }
  return out;
}

SchemaDef people_schema() {
  SchemaDef s;
  s.root_name = "person";
  auto leaf = [](ValueType t) {
    ElementDecl d;
    d.content = t;
    return d;
  };
  ElementDecl person;
  person.attributes = {{"dept", ValueType::string, false}, {"id", ValueType::integer, true}};
  person.children = {{"name", Cardinality::one},
                     {"age", Cardinality::optional},
                     {"email", Cardinality::many},
                     {"address", Cardinality::optional}};
  ElementDecl address;
  address.children = {{"city", Cardinality::one}, {"zip", Cardinality::optional}};
  s.elements = {{"person", person},  {"address", address},          {"name", leaf(ValueType::string)},
                {"age", leaf(ValueType::integer)}, {"email", leaf(ValueType::string)}, {"city", leaf(ValueType::string)},
                {"zip", leaf(ValueType::integer)}};
  return s;
}

std::vector<TreeNode> people_documents(Rng& rng, std::size_t n) {
  static const std::vector<std::string> first = {"Ann", "Bob", "Cy", "Dee", "Eve"};
  static const std::vector<std::string> depts = {"db", "ir", "hci"};
  static const std::vector<std::string> cities = {"Paris", "Orsay", "Lyon"};
  std::vector<TreeNode> docs;
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode p("person");
    p.set("id", std::to_string(uniform(rng, 1, 50)));
    if (chance(rng, 0.7)) p.set("dept", depts[uniform(rng, 0, depts.size() - 1)]);
    p.add(TreeNode::leaf("name", first[uniform(rng, 0, first.size() - 1)]));
    if (chance(rng, 0.6)) p.add(TreeNode::leaf("age", std::to_string(uniform(rng, 20, 70))));
    std::size_t emails = uniform(rng, 0, 3);
    for (std::size_t e = 0; e < emails; ++e) {
      p.add(TreeNode::leaf("email", "e" + std::to_string(uniform(rng, 0, 9)) + "@x.org"));
    }
    if (chance(rng, 0.6)) {
      TreeNode a("address");
      a.add(TreeNode::leaf("city", cities[uniform(rng, 0, cities.size() - 1)]));
      if (chance(rng, 0.5)) a.add(TreeNode::leaf("zip", std::to_string(uniform(rng, 10000, 99999))));
      p.add(std::move(a));
    }
    docs.push_back(std::move(p));
  }
  return docs;
}

namespace {

struct VarChoice {
  std::string var;
  // operand suffixes valid for this var, with a literal maker per type
  std::vector<std::pair<Operand, std::string>> operands;  // operand, "int" | "string" | "date"
};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[uniform(rng, 0, v.size() - 1)];
}

Operand op(std::string var, std::optional<std::string> path = std::nullopt, std::optional<std::string> attr = std::nullopt) {
  Operand o;
  o.var = std::move(var);
  if (path) o.path = parse_path(*path);
  o.attribute = std::move(attr);
  return o;
}

std::string literal_for(Rng& rng, const std::string& type) {
  if (type == "int" || type == "elem") return std::to_string(uniform(rng, 0, 80));
  if (type == "date") return pick(rng, std::vector<std::string>{"2002-04-02T00:00:00Z", "2003-06-01T12:00:00Z"});
  return pick(rng, std::vector<std::string>{"Ann", "Bob", "Paris", "e3@x.org", "db", "a", "user1@dom0.test"});
}

Filter random_filter(Rng& rng, const std::vector<VarChoice>& vars, int depth) {
  std::size_t kind = depth > 1 ? 3 : uniform(rng, 0, 5);
  if (kind == 0 || kind == 1) {
    std::vector<Filter> parts;
    std::size_t k = uniform(rng, 1, 3);
    for (std::size_t i = 0; i < k; ++i) parts.push_back(random_filter(rng, vars, depth + 1));
    Filter f;
    f.kind = kind == 0 ? Filter::Kind::all_of : Filter::Kind::any_of;
    f.parts = std::move(parts);
    return f;
  }
  if (kind == 2) {
    Filter f;
    f.kind = Filter::Kind::negation;
    f.parts.push_back(random_filter(rng, vars, depth + 1));
    return f;
  }
  const VarChoice& v = pick(rng, vars);
  const auto& [left, type] = pick(rng, v.operands);
  static const std::vector<Comparator> ops = {Comparator::eq, Comparator::ne, Comparator::lt, Comparator::le,
                                              Comparator::gt, Comparator::ge, Comparator::contains};
  Comparator c = pick(rng, ops);
  if (chance(rng, 0.3)) {
    // var-vs-var with a matching type
    for (const auto& w : vars) {
      for (const auto& [o, t] : w.operands) {
        if (t == type && chance(rng, 0.5)) return Filter::compare(c, left, o);
      }
    }
  }
  return Filter::compare(c, left, Literal{literal_for(rng, type)});
}

TemplateNode random_template(Rng& rng, const std::vector<VarChoice>& vars, std::size_t keys, int depth) {
  static const std::vector<std::string> names = {"a", "b", "c", "item", "v"};
  TemplateNode e = TemplateNode::element(pick(rng, names));
  if (chance(rng, 0.2)) e.attributes["kind"] = "k" + std::to_string(uniform(rng, 0, 2));
  std::size_t shape = uniform(rng, 0, depth >= 2 ? 3 : 5);
  const VarChoice& v = pick(rng, vars);
  const Operand& o = pick(rng, v.operands).first;
  switch (shape) {
    case 0: e.children.push_back(TemplateNode::value(o)); return e;
    case 1:
      if (keys) {
        e.children.push_back(TemplateNode::key(uniform(rng, 0, keys - 1)));
        return e;
      }
      e.children.push_back(TemplateNode::value(o));
      return e;
    case 2: {
      static const std::vector<AggregateFn> fns = {AggregateFn::count, AggregateFn::sum, AggregateFn::min, AggregateFn::max};
      e.children.push_back(TemplateNode::aggregate(pick(rng, fns), o));
      return e;
    }
    case 3: return e;  // empty element
    default: {
      std::size_t k = uniform(rng, 1, 4);
      for (std::size_t i = 0; i < k; ++i) {
        if (chance(rng, 0.25)) {
          Operand c = pick(rng, v.operands).first;
          c.attribute.reset();
          e.children.push_back(TemplateNode::copy(c));
        } else {
          e.children.push_back(random_template(rng, vars, keys, depth + 1));
        }
      }
      return e;
    }
  }
}

}  // namespace

QuerySpec random_spec(Rng& rng, const std::string& source, bool messages) {
  QuerySpec spec;
  spec.source = source;
  std::vector<VarChoice> vars;
  if (messages) {
    std::string root = pick(rng, std::vector<std::string>{"message", "//message", "*", "message[from_address contains 'user1']"});
    spec.bindings.push_back({"m", std::nullopt, parse_path(root)});
    vars.push_back({"m",
                    {{op("m", "from_address"), "string"},
                     {op("m", "subject_norm"), "string"},
                     {op("m", "date"), "date"},
                     {op("m", std::nullopt, "offset"), "int"},
                     {op("m", "references/ref"), "string"},
                     {op("m", "in_reply_to"), "string"},
                     {op("m"), "elem"}}});
    if (chance(rng, 0.4)) {
      std::string rel = pick(rng, std::vector<std::string>{"references/ref", "*", "//ref", "date"});
      spec.bindings.push_back({"r", "m", parse_path(rel)});
      vars.push_back({"r", {{op("r"), rel == "date" ? "date" : rel == "*" ? "elem" : "string"}}});
    }
  } else {
    std::string root = pick(rng, std::vector<std::string>{"person", "//person", "person[@dept='db']", "person[age > 40]",
                                                           "*", "//address", "//email", "//*", "person/address"});
    spec.bindings.push_back({"p", std::nullopt, parse_path(root)});
    if (root.find("address") != std::string::npos) {
      vars.push_back({"p", {{op("p", "city"), "string"}, {op("p", "zip"), "int"}, {op("p"), "elem"}}});
    } else if (root.find("person") != std::string::npos) {
      vars.push_back({"p",
                      {{op("p", "name"), "string"},
                       {op("p", "age"), "int"},
                       {op("p", std::nullopt, "id"), "int"},
                       {op("p", std::nullopt, "dept"), "string"},
                       {op("p", "email"), "string"},
                       {op("p", "address/city"), "string"},
                       {op("p", "address/zip"), "int"},
                       {op("p", "*"), "elem"},
                       {op("p", "//zip"), "int"},
                       {op("p"), "elem"}}});
      if (chance(rng, 0.5)) {
        std::string rel = pick(rng, std::vector<std::string>{"email", "address", "address/city", "*", "//zip", "age",
                                                              "name", "address[zip > 50000]"});
        spec.bindings.push_back({"e", "p", parse_path(rel)});
        std::string tag = rel == "//zip" || rel == "age" ? "int" : rel == "email" || rel == "name" || rel == "address/city" ? "string" : "elem";
        vars.push_back({"e", {{op("e"), tag}, {op("e", "*"), "elem"}}});
      }
    } else {
      vars.push_back({"p", {{op("p"), "elem"}, {op("p", "*"), "elem"}, {op("p", std::nullopt, "id"), "int"}}});
    }
  }
  if (chance(rng, 0.5)) spec.filters = random_filter(rng, vars, 0);
  if (chance(rng, 0.4)) {
    std::size_t g = uniform(rng, 1, 2);
    for (std::size_t i = 0; i < g; ++i) spec.group_by.push_back(pick(rng, pick(rng, vars).operands).first);
  }
  spec.result = TemplateNode::element(messages ? "out" : "result");
  std::size_t k = uniform(rng, 1, 4);
  for (std::size_t i = 0; i < k; ++i) {
    if (chance(rng, 0.2)) {
      Operand c = pick(rng, vars.front().operands).first;
      c.attribute.reset();
      spec.result.children.push_back(TemplateNode::copy(c));
    } else {
      spec.result.children.push_back(random_template(rng, vars, spec.group_by.size(), 1));
    }
  }
  return spec;
}

SocialGraph random_graph(Rng& rng) {
  static const std::string alphabet = "abcXYZ <>&\"' \t\n\xc3\xbc-_.,;#";
  SocialGraph g;
  std::set<EntityId> ids;
  std::size_t n = uniform(rng, 0, 30);
  while (ids.size() < n) ids.insert(static_cast<EntityId>(uniform(rng, 0, 1'000'000'000'000ULL)));
  for (EntityId id : ids) {
    GraphNode node;
    node.id = id;
    std::size_t len = uniform(rng, 0, 12);
    for (std::size_t i = 0; i < len; ++i) {
      char c = alphabet[uniform(rng, 0, alphabet.size() - 1)];
      if (static_cast<unsigned char>(c) == 0xc3) {
        node.label += "\xc3\xbc";
        continue;
      }
      if (static_cast<unsigned char>(c) == 0xbc) continue;
      node.label += c;
    }
    if (chance(rng, 0.6)) node.institution = "inst" + std::to_string(uniform(rng, 0, 4)) + (chance(rng, 0.2) ? " & <Co>" : "");
    g.nodes.push_back(std::move(node));
  }
  std::vector<EntityId> v(ids.begin(), ids.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (chance(rng, 0.15)) g.edges.push_back({v[i], v[j], static_cast<std::int64_t>(uniform(rng, 1, 1000))});
    }
  }
  std::shuffle(g.nodes.begin(), g.nodes.end(), rng);
  std::shuffle(g.edges.begin(), g.edges.end(), rng);
  return g;
}

SocialGraph read_graphml(const std::string& text) {
  TreeNode root = parse_xml(text);
  if (root.name != "graphml") throw std::runtime_error("not graphml");
  const TreeNode* graph = root.child("graph");
  if (!graph) throw std::runtime_error("no graph element");
  if (graph->attributes.at("edgedefault") != "undirected") throw std::runtime_error("directed graph");
  auto id_of = [](const std::string& s) -> EntityId {
    if (s.empty() || s[0] != 'n') throw std::runtime_error("bad node id " + s);
    return std::stoll(s.substr(1));
  };
  SocialGraph g;
  for (const auto& c : graph->children) {
    std::map<std::string, std::string> data;
    for (const auto& d : c.children) {
      if (d.name == "data") data[d.attributes.at("key")] = d.text.value_or("");
    }
    if (c.name == "node") {
      GraphNode n{id_of(c.attributes.at("id")), data["label"], std::nullopt};
      if (data.count("institution")) n.institution = data["institution"];
      g.nodes.push_back(std::move(n));
    } else if (c.name == "edge") {
      g.edges.push_back({id_of(c.attributes.at("source")), id_of(c.attributes.at("target")), std::stoll(data.at("weight"))});
    }
  }
  return g;
}

std::string check_dot(const std::string& text) {
  // tokens
  struct Tok {
    std::string kind;  // id, str, punct
    std::string text;
  };
  std::vector<Tok> toks;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
      if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
        toks.push_back({"punct", "--"});
        i += 2;
        continue;
      }
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '.')) ++j;
      if (j == i) return "stray '-' at " + std::to_string(i);
      toks.push_back({"id", text.substr(i, j - i)});
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != '"') j += text[j] == '\\' ? 2 : 1;
      if (j >= text.size()) return "unterminated string at " + std::to_string(i);
      toks.push_back({"str", text.substr(i, j - i + 1)});
      i = j + 1;
    } else if (std::string("{}[]=,;").find(c) != std::string::npos) {
      toks.push_back({"punct", std::string(1, c)});
      ++i;
    } else if (static_cast<unsigned char>(c) >= 0x80) {
      return "non-ASCII outside a string at " + std::to_string(i);
    } else {
      return std::string("unexpected '") + c + "' at " + std::to_string(i);
    }
  }
  std::size_t p = 0;
  auto at = [&](const std::string& s) { return p < toks.size() && toks[p].text == s && toks[p].kind == "punct"; };
  auto is_id = [&] { return p < toks.size() && (toks[p].kind == "id" || toks[p].kind == "str"); };
  std::string err;
  auto attr_list = [&]() -> bool {
    while (at("[")) {
      ++p;
      while (is_id()) {
        ++p;
        if (!at("=")) {
          err = "expected '=' in attribute list";
          return false;
        }
        ++p;
        if (!is_id()) {
          err = "expected attribute value";
          return false;
        }
        ++p;
        if (at(",") || at(";")) ++p;
      }
      if (!at("]")) {
        err = "expected ']'";
        return false;
      }
      ++p;
    }
    return true;
  };
  if (p < toks.size() && toks[p].text == "strict") ++p;
  if (p >= toks.size() || toks[p].text != "graph") return "expected 'graph'";
  ++p;
  if (is_id()) ++p;
  if (!at("{")) return "expected '{'";
  ++p;
  while (p < toks.size() && !at("}")) {
    if (!is_id()) return "expected statement at token " + std::to_string(p);
    ++p;
    if (at("=")) {
      ++p;
      if (!is_id()) return "expected value";
      ++p;
    } else {
      while (at("--")) {
        ++p;
        if (!is_id()) return "expected node after '--'";
        ++p;
      }
      if (!attr_list()) return err;
    }
    if (at(";")) ++p;
  }
  if (!at("}")) return "expected '}'";
  ++p;
  if (p != toks.size()) return "trailing tokens";
  return "";
}

namespace {

struct RecFixtureRow {
  const char* institution;
  const char* domain;  // affiliation object as asserted
  const char* type;
  int individuals, rec, notes, drafts;
};

const std::vector<RecFixtureRow>& rec_fixture_rows() {
  static const std::vector<RecFixtureRow> rows = {
      {"IBM", "us.ibm.com", "Corp", 11, 8, 2, 3},
      {"Oracle", "oracle.com", "Corp", 8, 6, 1, 6},
      {"AT&T", "research.att.com", "Corp", 2, 4, 0, 3},
      {"Microsoft", "microsoft.com", "Corp", 5, 4, 0, 2},
      {"Unknown", nullptr, "n.a.", 2, 3, 0, 0},
      {"Sun Microsystems", "sun.com", "Corp", 1, 3, 0, 0},
      {"Data Direct Technologies", "datadirect.com", "Corp", 1, 2, 2, 2},
      {"University of Edimbourg", "inf.ed.ac.uk", "Uni", 2, 2, 1, 0},
      {"Saxonica", "saxonica.com", "Corp", 1, 2, 0, 0},
      {"Infonyte GmbH", "infonyte.com", "Corp", 1, 1, 2, 0},
      {"Brown University", "cs.brown.edu", "Uni", 1, 1, 0, 0},
      {"CommerceOne", "commerceone.com", "Corp", 1, 1, 0, 0},
      {"Inso", "inso.com", "Corp", 1, 1, 0, 0},
      {"Kaiser Permanente", "kp.org", "Org", 1, 1, 0, 0},
      {"SIAC", "siac.com", "Corp", 1, 1, 0, 0},
  };
  return rows;
}

}  // namespace

InstitutionMap rec_fixture_institutions() {
  std::string csv = "# fixture map\n*.ibm.com,IBM\nibm.com,IBM\n";
  for (const auto& r : rec_fixture_rows()) {
    if (r.domain && std::string(r.institution) != "IBM") csv += text::csv_field(r.domain) + "," + text::csv_field(r.institution) + "\n";
  }
  return InstitutionMap::parse_csv(csv);
}

std::string rec_fixture_facts_jsonl() {
  using json = nlohmann::json;
  std::string out;
  auto emit = [&](const std::string& s, const std::string& p, const std::string& o, const std::string& when) {
    json line = {{"fact", {{"subject", s}, {"predicate", p}, {"object", o}, {"event_time", when}}},
                 {"chain",
                  {{{"agent", "W3C technical reports index"}, {"kind", "published"}, {"time", "2006-06-01T00:00:00Z"}},
                   {{"agent", "Ann Onymous"}, {"kind", "learned"}, {"time", "2008-01-01T00:00:00Z"}}}}};
    out += line.dump() + "\n";
  };
  int doc_day = 1;
  for (const auto& r : rec_fixture_rows()) {
    std::string inst = r.institution;
    std::vector<std::string> people;
    for (int i = 0; i < r.individuals; ++i) people.push_back(inst + " author " + std::to_string(i + 1));
    if (r.domain) {
      emit(inst, "institution_type", r.type, "2000-01-01T00:00:00Z");
      // IBM's domain appears both as a subdomain and bare, both mapped
      for (std::size_t i = 0; i < people.size(); ++i) {
        std::string dom = inst == "IBM" && i % 2 ? "ibm.com" : r.domain;
        emit(people[i], "affiliated_with", dom, "2001-01-01T00:00:00Z");
      }
    }
    if (inst == "IBM") {
      // moved from Oracle before authoring anything: counted at IBM
      emit(people[0], "affiliated_with", "oracle.com", "1999-01-01T00:00:00Z");
    }
    if (inst == "Oracle") {
      // joined IBM years after authoring: still counted at Oracle
      emit(people[1], "affiliated_with", "us.ibm.com", "2010-01-01T00:00:00Z");
    }
    std::size_t next_author = 0;
    auto docs = [&](const char* kind, int count) {
      for (int k = 0; k < count; ++k) {
        std::string doc = std::string(kind) + ":" + inst + "-" + kind + "-" + std::to_string(k);
        if (std::string(kind) == "REC" && k == 0 && (inst == "IBM" || inst == "Oracle")) doc = "REC:xquery-1.0";
        std::string when = "2003-01-" + std::string(doc_day < 10 ? "0" : "") + std::to_string(doc_day) + "T00:00:00Z";
        doc_day = doc_day % 28 + 1;
        // two distinct authors where possible, each counted once per doc
        emit(people[next_author % people.size()], "authored", doc, when);
        ++next_author;
        if (people.size() > 1) emit(people[next_author % people.size()], "authored", doc, when);
      }
    };
    docs("REC", r.rec);
    docs("NOTE", r.notes);
    docs("WD", r.drafts);
  }
  // a fact the table must ignore
  emit("Some Person", "authored", "BLOG:post", "2003-01-01T00:00:00Z");
  return out;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "liststand-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path, ec);
}

}  // namespace support
