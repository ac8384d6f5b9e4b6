#include "liststand/identity.hpp"

#include "liststand/error.hpp"
#include "liststand/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

namespace liststand {
namespace {

struct Pieces {
  std::string display;  // text before '<', quotes removed
  std::string comment;  // first "(...)" comment
  std::string addr_spec;
};

Pieces split_address(std::string_view raw) {
  Pieces p;
  std::string without_comments;
  int depth = 0;
  bool quoted = false;
  bool comment_done = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (depth == 0 && c == '"' && (i == 0 || raw[i - 1] != '\\')) quoted = !quoted;
    if (!quoted && c == '(') {
      ++depth;
      if (depth == 1) continue;
    } else if (!quoted && c == ')' && depth > 0) {
      --depth;
      if (depth == 0) {
        comment_done = true;
        continue;
      }
    }
    if (depth > 0) {
      if (!comment_done) p.comment.push_back(c);
    } else {
      without_comments.push_back(c);
    }
  }
  std::string_view s = without_comments;
  std::size_t open = std::string_view::npos;
  quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (!quoted && s[i] == '<') open = i;
  }
  if (open != std::string_view::npos) {
    std::size_t close = s.find('>', open);
    p.addr_spec = std::string(text::trim(s.substr(open + 1, close == std::string_view::npos ? std::string_view::npos : close - open - 1)));
    std::string display;
    for (char c : s.substr(0, open)) {
      if (c != '"') display.push_back(c);
    }
    p.display = std::string(text::trim(display));
  } else {
    p.addr_spec = std::string(text::trim(s));
  }
  p.comment = std::string(text::trim(p.comment));
  return p;
}

class UnionFind {
public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // The smaller index becomes the root so roots are canonical.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

private:
  std::vector<std::size_t> parent_;
};

std::size_t token_count(std::string_view s) {
  std::size_t n = 0;
  bool in = false;
  for (char c : s) {
    bool space = c == ' ';
    if (!space && !in) ++n;
    in = !space;
  }
  return n;
}

template <typename Counts>
std::optional<std::string> most_frequent(const Counts& counts) {
  std::optional<std::string> best;
  std::size_t best_n = 0;
  for (const auto& [value, n] : counts) {  // map iteration is key-ascending
    if (n > best_n) {
      best = value;
      best_n = n;
    }
  }
  return best;
}

}  // namespace

Address normalize_address(std::string_view raw, bool strip_plus_tag) {
  Pieces p = split_address(raw);
  std::size_t at = p.addr_spec.rfind('@');
  if (at == std::string::npos) throw Error(ErrorCode::invalid_argument, "unparseable address");
  std::string local;
  for (char c : p.addr_spec.substr(0, at)) {
    if (c == '"' || std::isspace(static_cast<unsigned char>(c))) continue;
    local.push_back(c == '@' ? '%' : c);
  }
  local = text::to_lower(local);
  if (strip_plus_tag) {
    std::size_t plus = local.find('+');
    if (plus != std::string::npos && plus > 0) local.resize(plus);
  }
  std::string domain = text::to_lower(text::trim(p.addr_spec.substr(at + 1)));
  while (!domain.empty() && domain.back() == '.') domain.pop_back();
  if (domain.size() >= 2 && domain.front() == '[' && domain.back() == ']') {
    domain = domain.substr(1, domain.size() - 2);
  }
  if (local.empty() || domain.empty()) throw Error(ErrorCode::invalid_argument, "unparseable address");
  Address a{std::move(local), std::move(domain), std::nullopt};
  std::string display = p.display.empty() ? p.comment : p.display;
  if (display.find('@') == std::string::npos) a.display_norm = normalize_display(display);
  return a;
}

std::string extract_display_name(std::string_view raw) {
  Pieces p = split_address(raw);
  std::string display = p.display.empty() ? p.comment : p.display;
  if (display.find('@') != std::string::npos) return {};
  return text::collapse_whitespace(display);
}

std::optional<std::string> normalize_display(std::string_view display) {
  std::string cleaned;
  cleaned.reserve(display.size());
  for (char c : display) {
    cleaned.push_back(std::ispunct(static_cast<unsigned char>(c)) ? ' ' : c);
  }
  std::string out = text::to_lower(text::collapse_whitespace(cleaned));
  if (out.empty()) return std::nullopt;
  return out;
}

std::string extract_domain(const Address& addr) { return text::to_lower(addr.domain); }

InstitutionMap InstitutionMap::parse_csv(std::string_view csv) {
  InstitutionMap map;
  std::size_t line_no = 0;
  for (const auto& line : text::split(csv, '\n')) {
    ++line_no;
    std::string_view t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = text::parse_csv_line(t);
    if (fields.size() < 2 || text::trim(fields[0]).empty()) {
      throw Error(ErrorCode::invalid_argument, "institution map line " + std::to_string(line_no) + ": expected pattern,institution");
    }
    map.rules.push_back({text::to_lower(text::trim(fields[0])), std::string(text::trim(fields[1]))});
  }
  return map;
}

InstitutionMap InstitutionMap::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string map_institution(std::string_view domain, const InstitutionMap& map) {
  for (const auto& rule : map.rules) {
    std::string_view pat = rule.pattern;
    if (text::starts_with(pat, "*.")) {
      std::string_view suffix = pat.substr(1);  // ".ibm.com"
      if (domain.size() > suffix.size() && domain.substr(domain.size() - suffix.size()) == suffix) {
        return rule.institution;
      }
    } else if (domain == pat) {
      return rule.institution;
    }
  }
  return std::string(domain);
}

ResolveConfig ResolveConfig::from_rule_list(std::string_view rules) {
  ResolveConfig c;
  c.r1 = c.r2 = c.r3 = false;
  for (const auto& r : text::split(rules, ',')) {
    std::string name = text::to_lower(text::trim(r));
    if (name.empty()) continue;
    if (name == "r1") {
      c.r1 = true;
    } else if (name == "r2") {
      c.r2 = true;
    } else if (name == "r3") {
      c.r3 = true;
    } else {
      throw Error(ErrorCode::invalid_argument, "unknown merge rule: " + name);
    }
  }
  return c;
}

EntityCatalog::EntityCatalog(std::vector<Entity> entities) : entities_(std::move(entities)) {
  for (const auto& e : entities_) {
    for (const auto& a : e.addresses) {
      if (!by_address_.emplace(a.to_string(), e.entity_id).second) {
        throw Error(ErrorCode::invalid_argument, "address " + a.to_string() + " belongs to two entities");
      }
    }
  }
}

const Entity* EntityCatalog::find(EntityId id) const {
  if (id >= 0 && static_cast<std::size_t>(id) < entities_.size() && entities_[id].entity_id == id) {
    return &entities_[id];
  }
  for (const auto& e : entities_) {
    if (e.entity_id == id) return &e;
  }
  return nullptr;
}

std::optional<EntityId> EntityCatalog::entity_of_address(std::string_view address) const {
  auto it = by_address_.find(address);
  if (it == by_address_.end()) return std::nullopt;
  return it->second;
}

EntityId EntityCatalog::entity_of(const Message& m) const {
  if (auto id = entity_of_address(m.from_address)) return *id;
  throw Error(ErrorCode::not_found, "no entity for address " + m.from_address + " (message " + m.message_id + ")");
}

bool EntityCatalog::operator==(const EntityCatalog& o) const { return entities_ == o.entities_; }

EntityCatalog resolve_entities(const std::vector<Message>& messages, const ResolveConfig& config) {
  struct Observed {
    std::map<std::string, std::size_t> displays_norm;
    std::map<std::string, std::size_t> displays_raw;
  };
  std::map<Address, Observed> observed;
  for (const auto& m : messages) {
    Address a;
    try {
      a = normalize_address(m.from_address, false);
    } catch (const Error&) {
      continue;
    }
    a.display_norm.reset();
    Observed& o = observed[a];
    if (m.from_display) {
      if (auto norm = normalize_display(*m.from_display)) {
        ++o.displays_norm[*norm];
        ++o.displays_raw[*m.from_display];
      }
    }
  }

  std::vector<Address> addrs;
  std::vector<const Observed*> obs;
  for (const auto& [a, o] : observed) {
    addrs.push_back(a);
    addrs.back().display_norm = most_frequent(o.displays_norm);
    obs.push_back(&o);
  }

  UnionFind uf(addrs.size());
  std::vector<std::pair<std::size_t, MergeEvidence>> evidence;  // keyed by one member index

  auto merge_groups = [&](const std::map<std::string, std::vector<std::size_t>>& groups, const char* rule) {
    for (const auto& [key, members] : groups) {
      for (std::size_t k = 1; k < members.size(); ++k) {
        if (uf.unite(members[0], members[k])) {
          evidence.push_back({members[0], {rule, addrs[members[0]].to_string(), addrs[members[k]].to_string()}});
        }
      }
    }
  };

  if (config.r2) {
    std::map<std::string, std::vector<std::size_t>> by_display;
    for (std::size_t i = 0; i < addrs.size(); ++i) {
      for (const auto& [name, n] : obs[i]->displays_norm) {
        if (token_count(name) >= 2 && name.size() >= 7) by_display[name].push_back(i);
      }
    }
    merge_groups(by_display, "R2");
  }
  if (config.r3) {
    std::map<std::string, std::vector<std::size_t>> by_local;
    for (std::size_t i = 0; i < addrs.size(); ++i) {
      if (addrs[i].local.size() < 5) continue;
      by_local[addrs[i].local + '\n' + map_institution(addrs[i].domain, config.institutions)].push_back(i);
    }
    merge_groups(by_local, "R3");
  }

  std::map<std::size_t, std::size_t> root_to_entity;
  std::vector<Entity> entities;
  for (std::size_t i = 0; i < addrs.size(); ++i) {
    std::size_t root = uf.find(i);
    auto [it, inserted] = root_to_entity.try_emplace(root, entities.size());
    if (inserted) {
      entities.emplace_back();
      entities.back().entity_id = static_cast<EntityId>(entities.size() - 1);
    }
    entities[it->second].addresses.push_back(addrs[i]);
  }
  for (auto& [member, ev] : evidence) {
    entities[root_to_entity.at(uf.find(member))].evidence.push_back(std::move(ev));
  }
  // canonical name: most frequent raw display across the entity's addresses
  for (auto& e : entities) {
    std::map<std::string, std::size_t> counts;
    for (const auto& a : e.addresses) {
      for (const auto& [name, n] : observed.at(a).displays_raw) counts[name] += n;
    }
    e.canonical_name = most_frequent(counts);
  }
  return EntityCatalog(std::move(entities));
}

}  // namespace liststand
