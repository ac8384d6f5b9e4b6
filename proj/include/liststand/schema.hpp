#pragma once

#include "liststand/tree.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace liststand {

enum class ValueType { string, integer, date };
enum class Cardinality { one, optional, many };

const char* to_string(ValueType t);
const char* to_string(Cardinality c);
ValueType parse_value_type(std::string_view s);
Cardinality parse_cardinality(std::string_view s);

/// Cardinality of following one step after another.
Cardinality compose(Cardinality outer, Cardinality inner);
/// Cardinality of a sibling group made of two adjacent contributions.
Cardinality concat(Cardinality a, Cardinality b);
/// Least cardinality admitting both.
Cardinality widen(Cardinality a, Cardinality b);

bool value_matches(ValueType t, std::string_view value);

struct AttributeDecl {
  std::string name;
  ValueType type = ValueType::string;
  bool required = true;
  bool operator==(const AttributeDecl&) const = default;
};

struct ChildDecl {
  std::string name;
  Cardinality cardinality = Cardinality::one;
  bool operator==(const ChildDecl&) const = default;
};

struct ElementDecl {
  std::vector<AttributeDecl> attributes;
  std::vector<ChildDecl> children;  // groups, in document order
  std::optional<ValueType> content;  // leaf type; nullopt = element-only
  /// Accepts any attributes and subtree. Used where structure is unknown.
  bool open = false;
  bool operator==(const ElementDecl&) const = default;
};

/// A small DTD-like schema: element declarations are global by name.
struct SchemaDef {
  std::string root_name;
  std::map<std::string, ElementDecl> elements;

  const ElementDecl* find(std::string_view name) const;
  /// Every referenced child and the root are declared.
  std::vector<std::string> consistency_errors() const;
  bool operator==(const SchemaDef&) const = default;
};

struct Violation {
  std::string path;  // "/person/name[1]"
  std::string message;
  bool operator==(const Violation&) const = default;
};

/// All violations; empty means the document is valid.
std::vector<Violation> validate(const TreeNode& doc, const SchemaDef& schema);

/// A schema every instance of `doc` satisfies.
SchemaDef infer_trivial_schema(const TreeNode& doc);

nlohmann::json schema_to_json(const SchemaDef& schema);
SchemaDef schema_from_json(const nlohmann::json& j);

}  // namespace liststand
