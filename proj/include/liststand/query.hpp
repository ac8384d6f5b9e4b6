#pragma once

#include "liststand/path.hpp"
#include "liststand/schema.hpp"
#include "liststand/warehouse.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace liststand {

/// A value taken from a bound variable: the node itself, nodes reached by
/// a relative path, or an attribute of those.
struct Operand {
  std::string var;
  std::optional<PathExpr> path;
  std::optional<std::string> attribute;
  bool operator==(const Operand&) const = default;
};

struct Literal {
  std::string value;
  bool operator==(const Literal&) const = default;
};

struct Comparison {
  Comparator op = Comparator::eq;
  Operand left;
  std::variant<Operand, Literal> right;
  bool operator==(const Comparison&) const = default;
};

struct Filter {
  enum class Kind { all_of, any_of, negation, comparison };
  Kind kind = Kind::comparison;
  std::vector<Filter> parts;  // all_of / any_of / negation (one part)
  std::optional<Comparison> comparison;

  static Filter compare(Comparator op, Operand left, std::variant<Operand, Literal> right);
  static Filter all(std::vector<Filter> parts);
  bool operator==(const Filter&) const = default;
};

enum class AggregateFn { count, sum, min, max };

const char* to_string(AggregateFn fn);

/// Result skeleton. An element holds either element/copy items or exactly
/// one value-like item (value, key, aggregate) that becomes its text.
struct TemplateNode {
  enum class Kind { element, copy, value, key, aggregate };
  Kind kind = Kind::element;
  std::string name;                               // element
  std::map<std::string, std::string> attributes;  // element, static
  std::vector<TemplateNode> children;             // element
  Operand operand;                                // copy, value, aggregate
  std::size_t key_index = 0;                      // key
  AggregateFn fn = AggregateFn::count;            // aggregate

  static TemplateNode element(std::string name, std::vector<TemplateNode> children = {});
  static TemplateNode copy(Operand of);
  static TemplateNode value(Operand of);
  static TemplateNode key(std::size_t index);
  static TemplateNode aggregate(AggregateFn fn, Operand of);

  bool is_value_like() const { return kind == Kind::value || kind == Kind::key || kind == Kind::aggregate; }
  bool contains_aggregate() const;
  bool operator==(const TemplateNode&) const = default;
};

struct Binding {
  std::string var;
  std::optional<std::string> relative_to;  // nullopt: the source documents
  PathExpr path;
  bool operator==(const Binding&) const = default;
};

struct QuerySpec {
  std::string source;
  std::vector<Binding> bindings;
  std::optional<Filter> filters;
  std::vector<Operand> group_by;
  TemplateNode result;  // "template" on the wire

  bool operator==(const QuerySpec&) const = default;
};

/// Throws Error(invalid_argument) describing the first problem.
void check_well_formed(const QuerySpec& spec);

QuerySpec query_from_json(const nlohmann::json& j);
nlohmann::json query_to_json(const QuerySpec& spec);

/// Documents, schema and version of a named source (collection or view).
struct ResolvedSource {
  std::vector<DocumentPtr> documents;
  std::optional<SchemaDef> schema;
  std::uint64_t version = 0;
};

class SourceResolver {
public:
  virtual ~SourceResolver() = default;
  /// Error(not_found) for unknown names.
  virtual ResolvedSource resolve(const std::string& name) const = 0;
};

/// Resolves collection names against a warehouse snapshot.
class WarehouseResolver : public SourceResolver {
public:
  explicit WarehouseResolver(const Warehouse& warehouse) : warehouse_(warehouse) {}
  ResolvedSource resolve(const std::string& name) const override;

private:
  const Warehouse& warehouse_;
};

/// Evaluates against already-resolved documents.
std::vector<TreeNode> evaluate(const QuerySpec& spec, const ResolvedSource& source);
std::vector<TreeNode> evaluate(const QuerySpec& spec, const SourceResolver& resolver);
std::vector<TreeNode> evaluate(const QuerySpec& spec, const Warehouse& warehouse);

/// Schema every evaluate() result of `spec` validates against.
SchemaDef infer_result_schema(const QuerySpec& spec, const std::optional<SchemaDef>& data_schema);

}  // namespace liststand
