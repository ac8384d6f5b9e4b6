#pragma once

#include "liststand/query.hpp"
#include "liststand/warehouse.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace liststand {

struct ViewDef {
  std::string name;
  QuerySpec spec;
  bool materialized = false;
  SchemaDef result_schema;
  std::optional<std::uint64_t> version_built_at;  // materialized only
  bool operator==(const ViewDef&) const = default;
};

struct ViewStatus {
  ViewDef def;
  bool stale = false;
};

/// Views layered over warehouse collections. Materialized views live in a
/// collection of the same name; stale ones are reported, never rebuilt
/// behind the caller's back.
class ViewRegistry : public SourceResolver {
public:
  /// Loads views.json from the warehouse directory when present.
  explicit ViewRegistry(Warehouse& warehouse);

  /// Errors: conflict (name taken), rejected "cyclic view definition",
  /// not_found (source), invalid_argument (spec).
  ViewDef register_view(const std::string& name, QuerySpec spec, bool materialized);
  bool has_view(const std::string& name) const;
  ViewDef get(const std::string& name) const;
  std::vector<ViewStatus> list() const;
  bool is_stale(const std::string& name) const;
  /// Rebuilds a materialized view from its source; no-op for virtual ones.
  ViewDef refresh(const std::string& name);

  /// Collections and views alike.
  ResolvedSource resolve(const std::string& name) const override;
  std::optional<SchemaDef> source_schema(const std::string& name) const;
  /// The version a consumer of `name` observes.
  std::uint64_t effective_version(const std::string& name) const;

  nlohmann::json to_json() const;
  void load_json(const nlohmann::json& j);
  void save() const;

private:
  std::optional<ViewDef> find(const std::string& name) const;
  ViewDef build(ViewDef def);

  Warehouse& warehouse_;
  mutable std::mutex mutex_;  // guards views_
  std::mutex registry_writer_;
  std::map<std::string, ViewDef> views_;
};

nlohmann::json view_to_json(const ViewDef& def);
ViewDef view_from_json(const nlohmann::json& j);

}  // namespace liststand
