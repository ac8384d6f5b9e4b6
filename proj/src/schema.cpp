#include "liststand/schema.hpp"

#include "liststand/error.hpp"
#include "liststand/text.hpp"
#include "liststand/timestamp.hpp"

#include <algorithm>
#include <set>

namespace liststand {
namespace {

using json = nlohmann::json;

int rank(Cardinality c) { return static_cast<int>(c); }

bool blank(const std::optional<std::string>& t) {
  if (!t) return true;
  return text::trim(*t).empty();
}

void validate_node(const TreeNode& node, const std::string& path, const SchemaDef& schema,
                   std::vector<Violation>& out) {
  const ElementDecl* decl = schema.find(node.name);
  if (!decl) {
    out.push_back({path, "undeclared element <" + node.name + ">"});
    return;
  }
  if (decl->open) return;

  for (const auto& attr : decl->attributes) {
    auto it = node.attributes.find(attr.name);
    if (it == node.attributes.end()) {
      if (attr.required) out.push_back({path, "missing attribute '" + attr.name + "'"});
    } else if (!value_matches(attr.type, it->second)) {
      out.push_back({path, "attribute '" + attr.name + "' is not a valid " + to_string(attr.type) + ": \"" + it->second + "\""});
    }
  }
  for (const auto& [key, value] : node.attributes) {
    bool declared = std::any_of(decl->attributes.begin(), decl->attributes.end(),
                                [&](const AttributeDecl& a) { return a.name == key; });
    if (!declared) out.push_back({path, "undeclared attribute '" + key + "'"});
  }

  if (decl->content) {
    if (!node.children.empty()) out.push_back({path, "leaf element <" + node.name + "> has element children"});
    if (*decl->content != ValueType::string) {
      std::string value = node.text.value_or("");
      if (!value_matches(*decl->content, value)) {
        out.push_back({path, "content is not a valid " + std::string(to_string(*decl->content)) + ": \"" + value + "\""});
      }
    }
    return;
  }

  if (!blank(node.text)) out.push_back({path, "text content not allowed in <" + node.name + ">"});
  std::vector<std::size_t> counts(decl->children.size(), 0);
  std::map<std::string, std::size_t> seen;
  std::size_t group = 0;
  for (const auto& child : node.children) {
    std::string child_path = path + "/" + child.name + "[" + std::to_string(++seen[child.name]) + "]";
    std::size_t j = group;
    while (j < decl->children.size() && decl->children[j].name != child.name) ++j;
    if (j == decl->children.size()) {
      bool declared_earlier = std::any_of(decl->children.begin(), decl->children.end(),
                                          [&](const ChildDecl& c) { return c.name == child.name; });
      out.push_back({child_path, declared_earlier ? "element <" + child.name + "> out of declared order"
                                                  : "unexpected element <" + child.name + ">"});
    } else {
      group = j;
      ++counts[j];
    }
    validate_node(child, child_path, schema, out);
  }
  for (std::size_t i = 0; i < decl->children.size(); ++i) {
    const ChildDecl& c = decl->children[i];
    bool bad = (c.cardinality == Cardinality::one && counts[i] != 1) ||
               (c.cardinality == Cardinality::optional && counts[i] > 1);
    if (bad) {
      out.push_back({path, std::string("expected ") + (c.cardinality == Cardinality::one ? "exactly one" : "at most one") +
                               " <" + c.name + ">, found " + std::to_string(counts[i])});
    }
  }
}

struct Observed {
  std::size_t instances = 0;
  std::map<std::string, std::size_t> attribute_counts;
  bool has_text = false;
  bool has_nonblank_text = false;
  bool has_children = false;
  bool irregular = false;  // a child name reappears non-contiguously
  std::vector<std::map<std::string, std::size_t>> child_counts;
  std::set<std::pair<std::string, std::string>> precedes;
  std::set<std::string> child_names;
};

void observe(const TreeNode& node, std::map<std::string, Observed>& obs) {
  Observed& o = obs[node.name];
  ++o.instances;
  for (const auto& [k, v] : node.attributes) ++o.attribute_counts[k];
  if (node.text) {
    o.has_text = true;
    o.has_nonblank_text = o.has_nonblank_text || !node.text->empty();
  }
  o.has_children = o.has_children || !node.children.empty();
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> groups;
  for (const auto& c : node.children) {
    if (groups.empty() || groups.back() != c.name) {
      if (counts.count(c.name)) o.irregular = true;
      groups.push_back(c.name);
    }
    ++counts[c.name];
    o.child_names.insert(c.name);
  }
  for (std::size_t i = 1; i < groups.size(); ++i) o.precedes.insert({groups[i - 1], groups[i]});
  o.child_counts.push_back(std::move(counts));
  for (const auto& c : node.children) observe(c, obs);
}

// Kahn's algorithm, ties broken by name; nullopt on a cycle.
std::optional<std::vector<std::string>> order_groups(const Observed& o) {
  std::map<std::string, std::size_t> indegree;
  for (const auto& n : o.child_names) indegree[n] = 0;
  for (const auto& [a, b] : o.precedes) ++indegree[b];
  std::set<std::string> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.insert(n);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string n = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(n);
    for (const auto& [a, b] : o.precedes) {
      if (a == n && --indegree[b] == 0) ready.insert(b);
    }
  }
  if (order.size() != o.child_names.size()) return std::nullopt;
  return order;
}

}  // namespace

const char* to_string(ValueType t) {
  switch (t) {
    case ValueType::string: return "string";
    case ValueType::integer: return "int";
    case ValueType::date: return "date";
  }
  return "string";
}

const char* to_string(Cardinality c) {
  switch (c) {
    case Cardinality::one: return "one";
    case Cardinality::optional: return "optional";
    case Cardinality::many: return "many";
  }
  return "many";
}

ValueType parse_value_type(std::string_view s) {
  if (s == "string") return ValueType::string;
  if (s == "int" || s == "integer") return ValueType::integer;
  if (s == "date") return ValueType::date;
  throw Error(ErrorCode::invalid_argument, "unknown value type: " + std::string(s));
}

Cardinality parse_cardinality(std::string_view s) {
  if (s == "one") return Cardinality::one;
  if (s == "optional") return Cardinality::optional;
  if (s == "many") return Cardinality::many;
  throw Error(ErrorCode::invalid_argument, "unknown cardinality: " + std::string(s));
}

Cardinality compose(Cardinality outer, Cardinality inner) { return widen(outer, inner); }

Cardinality concat(Cardinality, Cardinality) { return Cardinality::many; }

Cardinality widen(Cardinality a, Cardinality b) { return rank(a) >= rank(b) ? a : b; }

bool value_matches(ValueType t, std::string_view value) {
  switch (t) {
    case ValueType::string: return true;
    case ValueType::integer: return text::is_integer(value);
    case ValueType::date: return parse_iso8601(value).has_value();
  }
  return false;
}

const ElementDecl* SchemaDef::find(std::string_view name) const {
  auto it = elements.find(std::string(name));
  return it == elements.end() ? nullptr : &it->second;
}

std::vector<std::string> SchemaDef::consistency_errors() const {
  std::vector<std::string> errors;
  if (root_name.empty() || !find(root_name)) errors.push_back("root element '" + root_name + "' is not declared");
  for (const auto& [name, decl] : elements) {
    std::set<std::string> names;
    for (const auto& c : decl.children) {
      if (!find(c.name)) errors.push_back("<" + name + "> references undeclared child <" + c.name + ">");
      if (!names.insert(c.name).second) errors.push_back("<" + name + "> declares child <" + c.name + "> twice");
    }
    if (decl.content && !decl.children.empty()) errors.push_back("<" + name + "> declares both content and children");
  }
  return errors;
}

std::vector<Violation> validate(const TreeNode& doc, const SchemaDef& schema) {
  std::vector<Violation> out;
  std::string path = "/" + doc.name;
  if (doc.name != schema.root_name) {
    out.push_back({path, "root element <" + doc.name + "> where <" + schema.root_name + "> was declared"});
    return out;
  }
  validate_node(doc, path, schema, out);
  return out;
}

SchemaDef infer_trivial_schema(const TreeNode& doc) {
  std::map<std::string, Observed> obs;
  observe(doc, obs);
  SchemaDef schema;
  schema.root_name = doc.name;
  for (auto& [name, o] : obs) {
    ElementDecl decl;
    for (const auto& [attr, n] : o.attribute_counts) {
      decl.attributes.push_back({attr, ValueType::string, n == o.instances});
    }
    auto order = o.irregular ? std::nullopt : order_groups(o);
    if ((o.has_children && o.has_nonblank_text) || !order) {
      decl = ElementDecl{};
      decl.open = true;
    } else if (!o.has_children && o.has_text) {
      decl.content = ValueType::string;
    } else {
      for (const auto& child : *order) {
        std::size_t lo = SIZE_MAX, hi = 0;
        for (const auto& counts : o.child_counts) {
          auto it = counts.find(child);
          std::size_t n = it == counts.end() ? 0 : it->second;
          lo = std::min(lo, n);
          hi = std::max(hi, n);
        }
        Cardinality c = hi > 1 ? Cardinality::many : lo == 1 ? Cardinality::one : Cardinality::optional;
        decl.children.push_back({child, c});
      }
    }
    schema.elements.emplace(name, std::move(decl));
  }
  return schema;
}

json schema_to_json(const SchemaDef& schema) {
  json elements = json::object();
  for (const auto& [name, decl] : schema.elements) {
    json e;
    e["attributes"] = json::array();
    for (const auto& a : decl.attributes) {
      e["attributes"].push_back({{"name", a.name}, {"type", to_string(a.type)}, {"required", a.required}});
    }
    e["children"] = json::array();
    for (const auto& c : decl.children) {
      e["children"].push_back({{"name", c.name}, {"cardinality", to_string(c.cardinality)}});
    }
    e["content"] = decl.content ? json(to_string(*decl.content)) : json(nullptr);
    e["open"] = decl.open;
    elements[name] = std::move(e);
  }
  return {{"root", schema.root_name}, {"elements", std::move(elements)}};
}

SchemaDef schema_from_json(const json& j) {
  try {
    SchemaDef schema;
    schema.root_name = j.at("root").get<std::string>();
    for (const auto& [name, e] : j.at("elements").items()) {
      ElementDecl decl;
      if (e.contains("attributes")) {
        for (const auto& a : e["attributes"]) {
          decl.attributes.push_back({a.at("name").get<std::string>(),
                                     parse_value_type(a.value("type", std::string("string"))),
                                     a.value("required", true)});
        }
      }
      if (e.contains("children")) {
        for (const auto& c : e["children"]) {
          decl.children.push_back({c.at("name").get<std::string>(),
                                   parse_cardinality(c.value("cardinality", std::string("one")))});
        }
      }
      if (e.contains("content") && !e["content"].is_null()) decl.content = parse_value_type(e["content"].get<std::string>());
      decl.open = e.value("open", false);
      schema.elements.emplace(name, std::move(decl));
    }
    auto errors = schema.consistency_errors();
    if (!errors.empty()) throw Error(ErrorCode::invalid_argument, "invalid schema: " + errors.front());
    return schema;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid schema json: ") + e.what());
  }
}

}  // namespace liststand
