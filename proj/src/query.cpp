#include "liststand/query.hpp"

#include "liststand/error.hpp"
#include "liststand/text.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_set>

namespace liststand {
namespace {

using json = nlohmann::json;
using Tuple = std::vector<const TreeNode*>;

[[noreturn]] void bad_spec(const std::string& what) {
  throw Error(ErrorCode::invalid_argument, "invalid query: " + what);
}

// ---------------------------------------------------------------------------
// Static analysis against the data schema

/// What a path can reach, relative to one context node.
struct Reach {
  bool document = false;  // the virtual node above each source document
  bool unknown = false;   // structure not described by the schema
  std::set<std::string> names;
  Cardinality card = Cardinality::one;
};

Reach unknown_reach(const PathStep& step) {
  Reach r;
  r.unknown = true;
  r.card = Cardinality::many;
  if (!step.wildcard()) r.names.insert(step.name);
  return r;
}

bool decl_known(const SchemaDef& schema, const std::string& name) {
  const ElementDecl* d = schema.find(name);
  return d && !d->open;
}

Reach step_reach(const Reach& from, const PathStep& step, const SchemaDef* schema) {
  if (!schema || from.unknown) return unknown_reach(step);
  auto matches = [&](const std::string& name) { return step.wildcard() || name == step.name; };
  Reach r;
  std::optional<Cardinality> card;
  if (step.axis == Axis::child) {
    if (from.document) {
      if (matches(schema->root_name)) {
        r.names.insert(schema->root_name);
        card = Cardinality::one;
      }
    } else {
      for (const auto& n : from.names) {
        if (!decl_known(*schema, n)) return unknown_reach(step);
        const ElementDecl& d = *schema->find(n);
        std::size_t hits = 0;
        Cardinality here = Cardinality::optional;
        for (const auto& c : d.children) {
          if (!matches(c.name)) continue;
          ++hits;
          r.names.insert(c.name);
          here = c.cardinality;
        }
        if (hits == 0) here = Cardinality::optional;
        if (hits > 1) here = Cardinality::many;
        card = card ? widen(*card, here) : here;
      }
    }
  } else {
    std::set<std::string> reachable;
    std::vector<std::string> frontier;
    if (from.document) {
      reachable.insert(schema->root_name);
      frontier.push_back(schema->root_name);
    } else {
      frontier.assign(from.names.begin(), from.names.end());
      for (const auto& n : from.names) {
        if (!decl_known(*schema, n)) return unknown_reach(step);
      }
    }
    std::set<std::string> expanded;
    while (!frontier.empty()) {
      std::string n = frontier.back();
      frontier.pop_back();
      if (!expanded.insert(n).second) continue;
      if (!decl_known(*schema, n)) return unknown_reach(step);
      for (const auto& c : schema->find(n)->children) {
        reachable.insert(c.name);
        frontier.push_back(c.name);
      }
    }
    for (const auto& n : reachable) {
      if (!decl_known(*schema, n)) return unknown_reach(step);
      if (matches(n)) r.names.insert(n);
    }
    card = Cardinality::many;
  }
  r.card = card.value_or(Cardinality::optional);
  if (r.names.empty()) r.card = Cardinality::optional;
  if (step.predicate && r.card == Cardinality::one) r.card = Cardinality::optional;
  return r;
}

Reach path_reach(Reach from, const PathExpr& path, const SchemaDef* schema) {
  Cardinality total = Cardinality::one;
  for (const auto& step : path.steps) {
    from = step_reach(from, step, schema);
    total = compose(total, from.card);
  }
  from.card = total;
  return from;
}

struct TypedValue {
  std::optional<ValueType> type;  // nullopt: untyped
  std::optional<ValueType> declared;  // keeps string, which literal checks ignore
  Cardinality card = Cardinality::one;
};

TypedValue value_type(const Reach& reach, const std::optional<std::string>& attribute, const SchemaDef* schema) {
  TypedValue tv;
  tv.card = Cardinality::one;
  if (!schema || reach.unknown) {
    tv.card = attribute ? Cardinality::optional : Cardinality::one;
    return tv;
  }
  std::set<ValueType> types;
  for (const auto& n : reach.names) {
    const ElementDecl* d = schema->find(n);
    if (attribute) {
      auto it = std::find_if(d->attributes.begin(), d->attributes.end(),
                             [&](const AttributeDecl& a) { return a.name == *attribute; });
      if (it == d->attributes.end()) {
        tv.card = Cardinality::optional;
        continue;
      }
      if (!it->required) tv.card = Cardinality::optional;
      types.insert(it->type);
    } else {
      types.insert(d->content.value_or(ValueType::string));
    }
  }
  if (types.size() == 1) tv.type = *types.begin();
  tv.declared = tv.type;
  if (tv.type == ValueType::string) tv.type.reset();
  return tv;
}

struct Analysis {
  const SchemaDef* schema = nullptr;
  std::map<std::string, std::size_t> index;
  std::vector<Reach> reach;          // per binding
  std::vector<Cardinality> var_card;  // composed along anchors

  Analysis(const QuerySpec& spec, const SchemaDef* s) : schema(s) {
    for (std::size_t i = 0; i < spec.bindings.size(); ++i) {
      const Binding& b = spec.bindings[i];
      Reach anchor;
      Cardinality anchor_card = Cardinality::one;
      if (b.relative_to) {
        std::size_t a = index.at(*b.relative_to);
        anchor = reach[a];
        anchor.card = Cardinality::one;
        anchor_card = var_card[a];
      } else {
        anchor.document = true;
      }
      Reach r = path_reach(anchor, b.path, schema);
      var_card.push_back(compose(anchor_card, r.card));
      reach.push_back(std::move(r));
      index.emplace(b.var, i);
    }
  }

  Reach operand_reach(const Operand& op) const {
    Reach r = reach.at(index.at(op.var));
    r.card = Cardinality::one;
    if (op.path) r = path_reach(r, *op.path, schema);
    return r;
  }

  TypedValue operand_value(const Operand& op) const {
    Reach r = operand_reach(op);
    TypedValue tv = value_type(r, op.attribute, schema);
    tv.card = compose(compose(var_card.at(index.at(op.var)), r.card), tv.card);
    return tv;
  }
};

void check_literal(const std::optional<ValueType>& type, const std::string& literal, Comparator op, const std::string& where) {
  if (!type || op == Comparator::contains) return;
  if (!value_matches(*type, literal)) {
    throw Error(ErrorCode::invalid_argument, "type mismatch: " + where + " is " + to_string(*type) +
                                                 " but literal \"" + literal + "\" is not");
  }
}

void check_path_predicates(const Reach& anchor, const PathExpr& path, const SchemaDef* schema) {
  if (!schema) return;
  Reach cur = anchor;
  for (const auto& step : path.steps) {
    PathStep bare = step;
    bare.predicate.reset();
    Reach target = step_reach(cur, bare, schema);
    if (step.predicate && !target.unknown) {
      const StepPredicate& p = *step.predicate;
      if (p.on_attribute) {
        check_literal(value_type(target, p.name, schema).type, p.literal, p.op, "attribute @" + p.name);
      } else {
        PathStep child{Axis::child, p.name, std::nullopt};
        check_literal(value_type(step_reach(target, child, schema), std::nullopt, schema).type, p.literal, p.op,
                      "element <" + p.name + ">");
      }
    }
    cur = step_reach(cur, step, schema);
  }
}

void check_filter_types(const Filter& f, const Analysis& an) {
  if (f.kind != Filter::Kind::comparison) {
    for (const auto& p : f.parts) check_filter_types(p, an);
    return;
  }
  const Comparison& c = *f.comparison;
  auto left = an.operand_value(c.left).type;
  if (const auto* lit = std::get_if<Literal>(&c.right)) {
    check_literal(left, lit->value, c.op, "$" + c.left.var);
  } else if (c.op != Comparator::contains) {
    // Declared string content still counts as a type when the other side is a typed leaf.
    auto left_decl = an.operand_value(c.left).declared;
    auto right = an.operand_value(std::get<Operand>(c.right)).declared;
    left = left_decl;
    if (left && right && *left != *right) {
      throw Error(ErrorCode::invalid_argument, std::string("type mismatch: comparing ") + to_string(*left) +
                                                   " with " + to_string(*right));
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

struct Value {
  const TreeNode* node;
  std::string text;
};

class Evaluator {
public:
  Evaluator(const QuerySpec& spec, const ResolvedSource& source) : spec_(spec), source_(source) {
    for (std::size_t i = 0; i < spec.bindings.size(); ++i) index_.emplace(spec.bindings[i].var, i);
  }

  std::vector<TreeNode> run() {
    Tuple cur(spec_.bindings.size(), nullptr);
    enumerate(0, cur);
    std::vector<TreeNode> out;
    if (!spec_.group_by.empty()) {
      auto less = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
          if (compare_values(a[i], Comparator::lt, b[i])) return true;
          if (compare_values(b[i], Comparator::lt, a[i])) return false;
          if (a[i] != b[i]) return a[i] < b[i];  // "01" vs "1"
        }
        return a.size() < b.size();
      };
      std::map<std::vector<std::string>, std::vector<std::size_t>, decltype(less)> groups(less);
      for (std::size_t t = 0; t < tuples_.size(); ++t) {
        std::vector<std::string> key;
        for (const auto& op : spec_.group_by) {
          auto vals = values(op, tuples_[t]);
          key.push_back(vals.empty() ? std::string() : vals.front().text);
        }
        groups[std::move(key)].push_back(t);
      }
      for (const auto& [key, members] : groups) instantiate(spec_.result, {members, &key, true}, out);
    } else if (spec_.result.contains_aggregate()) {
      std::vector<std::size_t> all(tuples_.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      instantiate(spec_.result, {all, nullptr, true}, out);
    } else {
      for (std::size_t t = 0; t < tuples_.size(); ++t) instantiate(spec_.result, {{t}, nullptr, false}, out);
    }
    return out;
  }

private:
  struct Instance {
    std::vector<std::size_t> members;
    const std::vector<std::string>* key;
    bool per_group;
  };

  void enumerate(std::size_t b, Tuple& cur) {
    if (b == spec_.bindings.size()) {
      if (!spec_.filters || holds(*spec_.filters, cur)) tuples_.push_back(cur);
      return;
    }
    const Binding& binding = spec_.bindings[b];
    if (binding.relative_to) {
      for (const TreeNode* n : evaluate_path(binding.path, *cur[index_.at(*binding.relative_to)])) {
        cur[b] = n;
        enumerate(b + 1, cur);
      }
    } else {
      for (const auto& doc : source_.documents) {
        for (const TreeNode* n : evaluate_path_from_document(binding.path, *doc)) {
          cur[b] = n;
          enumerate(b + 1, cur);
        }
      }
    }
    cur[b] = nullptr;
  }

  std::vector<const TreeNode*> nodes(const Operand& op, const Tuple& t) const {
    const TreeNode* n = t[index_.at(op.var)];
    if (!op.path) return {n};
    return evaluate_path(*op.path, *n);
  }

  std::vector<Value> values(const Operand& op, const Tuple& t) const {
    std::vector<Value> out;
    for (const TreeNode* n : nodes(op, t)) {
      if (op.attribute) {
        auto it = n->attributes.find(*op.attribute);
        if (it != n->attributes.end()) out.push_back({n, it->second});
      } else {
        out.push_back({n, n->text.value_or("")});
      }
    }
    return out;
  }

  bool holds(const Filter& f, const Tuple& t) const {
    switch (f.kind) {
      case Filter::Kind::all_of:
        return std::all_of(f.parts.begin(), f.parts.end(), [&](const Filter& p) { return holds(p, t); });
      case Filter::Kind::any_of:
        return std::any_of(f.parts.begin(), f.parts.end(), [&](const Filter& p) { return holds(p, t); });
      case Filter::Kind::negation:
        return !holds(f.parts.front(), t);
      case Filter::Kind::comparison: break;
    }
    const Comparison& c = *f.comparison;
    auto left = values(c.left, t);
    std::vector<std::string> right;
    if (const auto* lit = std::get_if<Literal>(&c.right)) {
      right.push_back(lit->value);
    } else {
      for (auto& v : values(std::get<Operand>(c.right), t)) right.push_back(std::move(v.text));
    }
    for (const auto& l : left) {
      for (const auto& r : right) {
        if (compare_values(l.text, c.op, r)) return true;
      }
    }
    return false;
  }

  // Distinct by source node across the instance's tuples, in tuple order.
  std::vector<Value> instance_values(const Operand& op, const Instance& inst) const {
    std::vector<Value> out;
    std::unordered_set<const TreeNode*> seen;
    for (std::size_t t : inst.members) {
      for (auto& v : values(op, tuples_[t])) {
        if (seen.insert(v.node).second) out.push_back(std::move(v));
      }
    }
    return out;
  }

  std::vector<const TreeNode*> instance_nodes(const Operand& op, const Instance& inst) const {
    std::vector<const TreeNode*> out;
    std::unordered_set<const TreeNode*> seen;
    for (std::size_t t : inst.members) {
      for (const TreeNode* n : nodes(op, tuples_[t])) {
        if (seen.insert(n).second) out.push_back(n);
      }
    }
    return out;
  }

  std::optional<std::string> aggregate(const TemplateNode& a, const Instance& inst) const {
    auto vals = instance_values(a.operand, inst);
    switch (a.fn) {
      case AggregateFn::count:
        return std::to_string(vals.size());
      case AggregateFn::sum: {
        long long total = 0;
        for (const auto& v : vals) {
          if (text::is_integer(v.text)) total += std::stoll(v.text);
        }
        return std::to_string(total);
      }
      case AggregateFn::min:
      case AggregateFn::max: {
        if (vals.empty()) return std::nullopt;
        std::string best = vals.front().text;
        Comparator better = a.fn == AggregateFn::min ? Comparator::lt : Comparator::gt;
        for (const auto& v : vals) {
          if (compare_values(v.text, better, best)) best = v.text;
        }
        return best;
      }
    }
    return std::nullopt;
  }

  void instantiate(const TemplateNode& t, const Instance& inst, std::vector<TreeNode>& out) const {
    auto make = [&] {
      TreeNode e(t.name);
      e.attributes = t.attributes;
      return e;
    };
    if (t.children.size() == 1 && t.children.front().is_value_like()) {
      const TemplateNode& v = t.children.front();
      if (v.kind == TemplateNode::Kind::value) {
        for (auto& val : instance_values(v.operand, inst)) {
          TreeNode e = make();
          e.text = std::move(val.text);
          out.push_back(std::move(e));
        }
      } else if (v.kind == TemplateNode::Kind::key) {
        TreeNode e = make();
        e.text = inst.key->at(v.key_index);
        out.push_back(std::move(e));
      } else if (auto result = aggregate(v, inst)) {
        TreeNode e = make();
        e.text = std::move(*result);
        out.push_back(std::move(e));
      }
      return;
    }
    TreeNode e = make();
    for (const auto& c : t.children) {
      if (c.kind == TemplateNode::Kind::element) {
        instantiate(c, inst, e.children);
      } else if (c.kind == TemplateNode::Kind::copy) {
        for (const TreeNode* n : instance_nodes(c.operand, inst)) e.children.push_back(*n);
      }
    }
    out.push_back(std::move(e));
  }

  const QuerySpec& spec_;
  const ResolvedSource& source_;
  std::map<std::string, std::size_t> index_;
  std::vector<Tuple> tuples_;
};

// ---------------------------------------------------------------------------
// Result schema inference

class SchemaBuilder {
public:
  SchemaBuilder(const QuerySpec& spec, const Analysis& an) : spec_(spec), an_(an) {
    per_group_ = !spec.group_by.empty() || spec.result.contains_aggregate();
  }

  SchemaDef build() {
    SchemaDef out;
    out.root_name = spec_.result.name;
    add_decl(spec_.result.name, element_decl(spec_.result));
    out.elements = std::move(elements_);
    return out;
  }

private:
  void add_decl(const std::string& name, ElementDecl decl) {
    auto [it, inserted] = elements_.emplace(name, decl);
    if (!inserted && !(it->second == decl)) {
      it->second = ElementDecl{};
      it->second.open = true;
    }
  }

  static ElementDecl open_decl() {
    ElementDecl d;
    d.open = true;
    return d;
  }

  void import_data_decls(const std::string& name) {
    std::vector<std::string> frontier{name};
    std::set<std::string> done;
    while (!frontier.empty()) {
      std::string n = frontier.back();
      frontier.pop_back();
      if (!done.insert(n).second) continue;
      const ElementDecl* d = an_.schema ? an_.schema->find(n) : nullptr;
      if (!d) {
        add_decl(n, open_decl());
        continue;
      }
      add_decl(n, *d);
      if (d->open) continue;
      for (const auto& c : d->children) frontier.push_back(c.name);
    }
  }

  Cardinality repeat(Cardinality per_tuple) const { return per_group_ ? Cardinality::many : per_tuple; }

  Cardinality element_card(const TemplateNode& t) const {
    if (t.children.size() == 1 && t.children.front().is_value_like()) {
      const TemplateNode& v = t.children.front();
      switch (v.kind) {
        case TemplateNode::Kind::value: return repeat(an_.operand_value(v.operand).card);
        case TemplateNode::Kind::aggregate:
          return v.fn == AggregateFn::count || v.fn == AggregateFn::sum ? Cardinality::one : Cardinality::optional;
        default: return Cardinality::one;
      }
    }
    return Cardinality::one;
  }

  ElementDecl element_decl(const TemplateNode& t) {
    ElementDecl decl;
    for (const auto& [k, v] : t.attributes) decl.attributes.push_back({k, ValueType::string, true});
    if (t.children.size() == 1 && t.children.front().is_value_like()) {
      const TemplateNode& v = t.children.front();
      std::optional<ValueType> type;
      switch (v.kind) {
        case TemplateNode::Kind::value: type = an_.operand_value(v.operand).type; break;
        case TemplateNode::Kind::key: {
          // a missing key value groups under "", which only a string admits
          TypedValue k = an_.operand_value(spec_.group_by.at(v.key_index));
          if (k.card == Cardinality::one) type = k.type;
          break;
        }
        case TemplateNode::Kind::aggregate:
          type = v.fn == AggregateFn::count || v.fn == AggregateFn::sum ? std::optional(ValueType::integer)
                                                                        : an_.operand_value(v.operand).type;
          break;
        default: break;
      }
      decl.content = type.value_or(ValueType::string);
      return decl;
    }

    std::vector<ChildDecl> contributions;
    bool open = false;
    for (const auto& c : t.children) {
      if (c.kind == TemplateNode::Kind::element) {
        add_decl(c.name, element_decl(c));
        contributions.push_back({c.name, element_card(c)});
      } else if (c.kind == TemplateNode::Kind::copy) {
        Reach r = an_.operand_reach(c.operand);
        Cardinality card = repeat(compose(an_.var_card.at(an_.index.at(c.operand.var)), c.operand.path ? r.card : Cardinality::one));
        if (r.unknown) {
          if (r.names.size() != 1) {
            open = true;
            continue;
          }
          add_decl(*r.names.begin(), open_decl());
          contributions.push_back({*r.names.begin(), card});
        } else if (r.names.size() == 1) {
          import_data_decls(*r.names.begin());
          contributions.push_back({*r.names.begin(), card});
        } else if (r.names.size() > 1) {
          open = true;
        }
      }
    }
    // adjacent contributions of one name form one group; a name recurring
    // later cannot be expressed as ordered groups
    std::vector<ChildDecl> groups;
    for (auto& c : contributions) {
      if (!groups.empty() && groups.back().name == c.name) {
        groups.back().cardinality = concat(groups.back().cardinality, c.cardinality);
        continue;
      }
      if (std::any_of(groups.begin(), groups.end(), [&](const ChildDecl& g) { return g.name == c.name; })) open = true;
      groups.push_back(std::move(c));
    }
    if (open) return open_decl();
    decl.children = std::move(groups);
    return decl;
  }

  const QuerySpec& spec_;
  const Analysis& an_;
  bool per_group_ = false;
  std::map<std::string, ElementDecl> elements_;
};

// ---------------------------------------------------------------------------
// JSON

Operand operand_from_json(const json& j) {
  Operand op;
  auto strip = [](std::string v) {
    if (!v.empty() && v[0] == '$') v.erase(0, 1);
    return v;
  };
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s.empty() || s[0] != '$') bad_spec("operand \"" + s + "\" must start with '$'");
    op.var = strip(s);
    return op;
  }
  if (!j.is_object() || !j.contains("var")) bad_spec("operand must be \"$var\" or an object with \"var\"");
  op.var = strip(j.at("var").get<std::string>());
  if (j.contains("path") && !j["path"].is_null()) op.path = parse_path(j["path"].get<std::string>());
  if (j.contains("attribute") && !j["attribute"].is_null()) op.attribute = j["attribute"].get<std::string>();
  return op;
}

json operand_to_json(const Operand& op) {
  if (!op.path && !op.attribute) return "$" + op.var;
  json j = {{"var", op.var}};
  if (op.path) j["path"] = to_string(*op.path);
  if (op.attribute) j["attribute"] = *op.attribute;
  return j;
}

Filter filter_from_json(const json& j) {
  if (!j.is_object()) bad_spec("filter must be an object");
  auto parts = [&](const char* key) {
    std::vector<Filter> out;
    if (!j.at(key).is_array()) bad_spec(std::string("\"") + key + "\" must be an array");
    for (const auto& p : j.at(key)) out.push_back(filter_from_json(p));
    return out;
  };
  Filter f;
  if (j.contains("and")) {
    f.kind = Filter::Kind::all_of;
    f.parts = parts("and");
  } else if (j.contains("or")) {
    f.kind = Filter::Kind::any_of;
    f.parts = parts("or");
  } else if (j.contains("not")) {
    f.kind = Filter::Kind::negation;
    f.parts.push_back(filter_from_json(j.at("not")));
  } else if (j.contains("op")) {
    Comparison c;
    c.op = parse_comparator(j.at("op").get<std::string>());
    c.left = operand_from_json(j.at("left"));
    const json& r = j.at("right");
    if (r.is_object() && r.contains("literal")) {
      const json& lit = r.at("literal");
      c.right = Literal{lit.is_string() ? lit.get<std::string>() : lit.dump()};
    } else if ((r.is_string() && !r.get<std::string>().empty() && r.get<std::string>()[0] == '$') ||
               (r.is_object() && r.contains("var"))) {
      c.right = operand_from_json(r);
    } else if (r.is_string()) {
      c.right = Literal{r.get<std::string>()};
    } else if (r.is_number() || r.is_boolean()) {
      c.right = Literal{r.dump()};
    } else {
      bad_spec("comparison right side must be an operand or literal");
    }
    f.kind = Filter::Kind::comparison;
    f.comparison = std::move(c);
  } else {
    bad_spec("filter needs one of and/or/not/op");
  }
  return f;
}

json filter_to_json(const Filter& f) {
  auto parts = [&] {
    json a = json::array();
    for (const auto& p : f.parts) a.push_back(filter_to_json(p));
    return a;
  };
  switch (f.kind) {
    case Filter::Kind::all_of: return {{"and", parts()}};
    case Filter::Kind::any_of: return {{"or", parts()}};
    case Filter::Kind::negation: return {{"not", filter_to_json(f.parts.front())}};
    case Filter::Kind::comparison: break;
  }
  const Comparison& c = *f.comparison;
  json right = std::holds_alternative<Literal>(c.right) ? json{{"literal", std::get<Literal>(c.right).value}}
                                                        : operand_to_json(std::get<Operand>(c.right));
  return {{"op", to_string(c.op)}, {"left", operand_to_json(c.left)}, {"right", std::move(right)}};
}

AggregateFn parse_aggregate(std::string_view s) {
  if (s == "count") return AggregateFn::count;
  if (s == "sum") return AggregateFn::sum;
  if (s == "min") return AggregateFn::min;
  if (s == "max") return AggregateFn::max;
  bad_spec("unknown aggregate: " + std::string(s));
}

TemplateNode template_from_json(const json& j) {
  if (!j.is_object()) bad_spec("template node must be an object");
  if (j.contains("element")) {
    TemplateNode t = TemplateNode::element(j.at("element").get<std::string>());
    if (j.contains("attributes")) {
      for (const auto& [k, v] : j.at("attributes").items()) t.attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    if (j.contains("children")) {
      for (const auto& c : j.at("children")) t.children.push_back(template_from_json(c));
    }
    return t;
  }
  if (j.contains("copy")) return TemplateNode::copy(operand_from_json(j.at("copy")));
  if (j.contains("value")) return TemplateNode::value(operand_from_json(j.at("value")));
  if (j.contains("key")) return TemplateNode::key(j.at("key").get<std::size_t>());
  if (j.contains("aggregate")) {
    return TemplateNode::aggregate(parse_aggregate(j.at("aggregate").get<std::string>()), operand_from_json(j.at("of")));
  }
  bad_spec("template node needs one of element/copy/value/key/aggregate");
}

json template_to_json(const TemplateNode& t) {
  switch (t.kind) {
    case TemplateNode::Kind::element: {
      json j = {{"element", t.name}};
      if (!t.attributes.empty()) j["attributes"] = t.attributes;
      json children = json::array();
      for (const auto& c : t.children) children.push_back(template_to_json(c));
      j["children"] = std::move(children);
      return j;
    }
    case TemplateNode::Kind::copy: return {{"copy", operand_to_json(t.operand)}};
    case TemplateNode::Kind::value: return {{"value", operand_to_json(t.operand)}};
    case TemplateNode::Kind::key: return {{"key", t.key_index}};
    case TemplateNode::Kind::aggregate: return {{"aggregate", to_string(t.fn)}, {"of", operand_to_json(t.operand)}};
  }
  return nullptr;
}

void check_template(const TemplateNode& t, const QuerySpec& spec, const std::set<std::string>& vars, bool root) {
  auto check_operand = [&](const Operand& op) {
    if (!vars.count(op.var)) bad_spec("unbound variable $" + op.var);
  };
  switch (t.kind) {
    case TemplateNode::Kind::element: {
      if (t.name.empty()) bad_spec("template element with empty name");
      bool value_like = std::any_of(t.children.begin(), t.children.end(),
                                    [](const TemplateNode& c) { return c.is_value_like(); });
      if (value_like && t.children.size() != 1) {
        bad_spec("<" + t.name + ">: a value, key or aggregate must be the only child (no mixed content)");
      }
      for (const auto& c : t.children) check_template(c, spec, vars, false);
      return;
    }
    case TemplateNode::Kind::copy:
      if (t.operand.attribute) bad_spec("copy of an attribute");
      check_operand(t.operand);
      break;
    case TemplateNode::Kind::value:
    case TemplateNode::Kind::aggregate:
      check_operand(t.operand);
      break;
    case TemplateNode::Kind::key:
      if (t.key_index >= spec.group_by.size()) bad_spec("key index " + std::to_string(t.key_index) + " out of range");
      break;
  }
  if (root) bad_spec("template root must be an element");
}

void check_filter(const Filter& f, const std::set<std::string>& vars) {
  switch (f.kind) {
    case Filter::Kind::all_of:
    case Filter::Kind::any_of:
      for (const auto& p : f.parts) check_filter(p, vars);
      return;
    case Filter::Kind::negation:
      if (f.parts.size() != 1) bad_spec("not takes exactly one filter");
      check_filter(f.parts.front(), vars);
      return;
    case Filter::Kind::comparison: break;
  }
  if (!f.comparison) bad_spec("comparison filter without comparison");
  if (!vars.count(f.comparison->left.var)) bad_spec("unbound variable $" + f.comparison->left.var);
  if (const auto* op = std::get_if<Operand>(&f.comparison->right); op && !vars.count(op->var)) {
    bad_spec("unbound variable $" + op->var);
  }
}

}  // namespace

Filter Filter::compare(Comparator op, Operand left, std::variant<Operand, Literal> right) {
  Filter f;
  f.kind = Kind::comparison;
  f.comparison = Comparison{op, std::move(left), std::move(right)};
  return f;
}

Filter Filter::all(std::vector<Filter> parts) {
  Filter f;
  f.kind = Kind::all_of;
  f.parts = std::move(parts);
  return f;
}

const char* to_string(AggregateFn fn) {
  switch (fn) {
    case AggregateFn::count: return "count";
    case AggregateFn::sum: return "sum";
    case AggregateFn::min: return "min";
    case AggregateFn::max: return "max";
  }
  return "count";
}

TemplateNode TemplateNode::element(std::string name, std::vector<TemplateNode> children) {
  TemplateNode t;
  t.kind = Kind::element;
  t.name = std::move(name);
  t.children = std::move(children);
  return t;
}

TemplateNode TemplateNode::copy(Operand of) {
  TemplateNode t;
  t.kind = Kind::copy;
  t.operand = std::move(of);
  return t;
}

TemplateNode TemplateNode::value(Operand of) {
  TemplateNode t;
  t.kind = Kind::value;
  t.operand = std::move(of);
  return t;
}

TemplateNode TemplateNode::key(std::size_t index) {
  TemplateNode t;
  t.kind = Kind::key;
  t.key_index = index;
  return t;
}

TemplateNode TemplateNode::aggregate(AggregateFn fn, Operand of) {
  TemplateNode t;
  t.kind = Kind::aggregate;
  t.fn = fn;
  t.operand = std::move(of);
  return t;
}

bool TemplateNode::contains_aggregate() const {
  if (kind == Kind::aggregate) return true;
  return std::any_of(children.begin(), children.end(), [](const TemplateNode& c) { return c.contains_aggregate(); });
}

void check_well_formed(const QuerySpec& spec) {
  if (spec.source.empty()) bad_spec("missing source");
  std::set<std::string> vars;
  for (const auto& b : spec.bindings) {
    if (b.var.empty()) bad_spec("binding with empty variable name");
    if (b.path.steps.empty()) bad_spec("binding $" + b.var + " has an empty path");
    if (b.relative_to && !vars.count(*b.relative_to)) {
      bad_spec("binding $" + b.var + " is relative to $" + *b.relative_to + ", which is not bound earlier");
    }
    if (!vars.insert(b.var).second) bad_spec("variable $" + b.var + " bound twice");
  }
  if (spec.filters) check_filter(*spec.filters, vars);
  for (const auto& g : spec.group_by) {
    if (!vars.count(g.var)) bad_spec("unbound variable $" + g.var + " in group_by");
  }
  check_template(spec.result, spec, vars, true);
}

QuerySpec query_from_json(const json& j) {
  try {
    QuerySpec spec;
    spec.source = j.at("source").get<std::string>();
    for (const auto& b : j.at("bindings")) {
      Binding binding;
      binding.var = b.at("var").get<std::string>();
      if (!binding.var.empty() && binding.var[0] == '$') binding.var.erase(0, 1);
      if (b.contains("relative_to") && !b["relative_to"].is_null()) {
        std::string rel = b["relative_to"].get<std::string>();
        if (!rel.empty() && rel[0] == '$') rel.erase(0, 1);
        binding.relative_to = rel;
      }
      binding.path = parse_path(b.at("path").get<std::string>());
      spec.bindings.push_back(std::move(binding));
    }
    if (j.contains("filters") && !j["filters"].is_null()) spec.filters = filter_from_json(j["filters"]);
    if (j.contains("group_by")) {
      for (const auto& g : j["group_by"]) spec.group_by.push_back(operand_from_json(g));
    }
    spec.result = template_from_json(j.at("template"));
    check_well_formed(spec);
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid query json: ") + e.what());
  }
}

json query_to_json(const QuerySpec& spec) {
  json bindings = json::array();
  for (const auto& b : spec.bindings) {
    bindings.push_back({{"var", b.var},
                        {"relative_to", b.relative_to ? json(*b.relative_to) : json(nullptr)},
                        {"path", to_string(b.path)}});
  }
  json group = json::array();
  for (const auto& g : spec.group_by) group.push_back(operand_to_json(g));
  return {{"source", spec.source},
          {"bindings", std::move(bindings)},
          {"filters", spec.filters ? filter_to_json(*spec.filters) : json(nullptr)},
          {"group_by", std::move(group)},
          {"template", template_to_json(spec.result)}};
}

ResolvedSource WarehouseResolver::resolve(const std::string& name) const {
  Snapshot snap = warehouse_.snapshot(name);
  return {std::move(snap.documents), std::move(snap.schema), snap.version};
}

std::vector<TreeNode> evaluate(const QuerySpec& spec, const ResolvedSource& source) {
  check_well_formed(spec);
  const SchemaDef* schema = source.schema ? &*source.schema : nullptr;
  Analysis an(spec, schema);
  for (std::size_t i = 0; i < spec.bindings.size(); ++i) {
    Reach anchor;
    if (spec.bindings[i].relative_to) {
      anchor = an.reach[an.index.at(*spec.bindings[i].relative_to)];
    } else {
      anchor.document = true;
    }
    check_path_predicates(anchor, spec.bindings[i].path, schema);
  }
  if (spec.filters) check_filter_types(*spec.filters, an);
  return Evaluator(spec, source).run();
}

std::vector<TreeNode> evaluate(const QuerySpec& spec, const SourceResolver& resolver) {
  return evaluate(spec, resolver.resolve(spec.source));
}

std::vector<TreeNode> evaluate(const QuerySpec& spec, const Warehouse& warehouse) {
  return evaluate(spec, WarehouseResolver(warehouse));
}

SchemaDef infer_result_schema(const QuerySpec& spec, const std::optional<SchemaDef>& data_schema) {
  check_well_formed(spec);
  Analysis an(spec, data_schema ? &*data_schema : nullptr);
  return SchemaBuilder(spec, an).build();
}

}  // namespace liststand
