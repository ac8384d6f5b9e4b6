#include "liststand/views.hpp"

#include "liststand/error.hpp"

#include <fstream>
#include <set>

namespace liststand {

using json = nlohmann::json;

namespace {

std::optional<std::filesystem::path> views_file(const Warehouse& w) {
  if (!w.directory()) return std::nullopt;
  return *w.directory() / "views.json";
}

}  // namespace

json view_to_json(const ViewDef& def) {
  return {{"name", def.name},
          {"spec", query_to_json(def.spec)},
          {"materialized", def.materialized},
          {"result_schema", schema_to_json(def.result_schema)},
          {"version_built_at", def.version_built_at ? json(*def.version_built_at) : json(nullptr)}};
}

ViewDef view_from_json(const json& j) {
  try {
    ViewDef def;
    def.name = j.at("name").get<std::string>();
    def.spec = query_from_json(j.at("spec"));
    def.materialized = j.value("materialized", false);
    if (j.contains("result_schema")) def.result_schema = schema_from_json(j.at("result_schema"));
    if (j.contains("version_built_at") && !j["version_built_at"].is_null()) {
      def.version_built_at = j["version_built_at"].get<std::uint64_t>();
    }
    return def;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid view json: ") + e.what());
  }
}

ViewRegistry::ViewRegistry(Warehouse& warehouse) : warehouse_(warehouse) {
  if (auto file = views_file(warehouse_); file && std::filesystem::exists(*file)) {
    std::ifstream in(*file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::io, file->string() + ": " + e.what());
    }
    load_json(j);
  }
}

std::optional<ViewDef> ViewRegistry::find(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = views_.find(name);
  if (it == views_.end()) return std::nullopt;
  return it->second;
}

bool ViewRegistry::has_view(const std::string& name) const { return find(name).has_value(); }

ViewDef ViewRegistry::get(const std::string& name) const {
  auto def = find(name);
  if (!def) throw Error(ErrorCode::not_found, "no such view: " + name);
  return *def;
}

std::optional<SchemaDef> ViewRegistry::source_schema(const std::string& name) const {
  if (auto def = find(name)) return def->result_schema;
  return warehouse_.schema(name);
}

std::uint64_t ViewRegistry::effective_version(const std::string& name) const {
  auto def = find(name);
  if (!def) return warehouse_.version(name);
  if (def->materialized) return warehouse_.version(name);
  return effective_version(def->spec.source);
}

ResolvedSource ViewRegistry::resolve(const std::string& name) const {
  auto def = find(name);
  if (!def || def->materialized) {
    ResolvedSource out = WarehouseResolver(warehouse_).resolve(name);
    if (def) out.schema = def->result_schema;
    return out;
  }
  ResolvedSource source = resolve(def->spec.source);
  std::vector<TreeNode> docs = evaluate(def->spec, source);
  ResolvedSource out;
  out.schema = def->result_schema;
  out.version = source.version;
  out.documents.reserve(docs.size());
  for (auto& d : docs) out.documents.push_back(std::make_shared<const TreeNode>(std::move(d)));
  return out;
}

ViewDef ViewRegistry::build(ViewDef def) {
  ResolvedSource source = resolve(def.spec.source);
  std::vector<TreeNode> docs = evaluate(def.spec, source);
  warehouse_.replace(def.name, std::move(docs));
  def.version_built_at = source.version;
  return def;
}

ViewDef ViewRegistry::register_view(const std::string& name, QuerySpec spec, bool materialized) {
  std::lock_guard writer(registry_writer_);
  if (!is_valid_collection_name(name)) throw Error(ErrorCode::invalid_argument, "invalid view name: " + name);
  if (has_view(name) || warehouse_.has_collection(name)) {
    throw Error(ErrorCode::conflict, "name already in use: " + name);
  }
  check_well_formed(spec);
  // Walk the source chain; registered views never form cycles, so only a
  // path back to the new name can.
  std::set<std::string> seen{name};
  for (std::string s = spec.source;;) {
    if (seen.count(s)) throw Error(ErrorCode::rejected, "cyclic view definition");
    seen.insert(s);
    auto def = find(s);
    if (!def) {
      if (!warehouse_.has_collection(s)) throw Error(ErrorCode::not_found, "no such source: " + s);
      break;
    }
    s = def->spec.source;
  }

  ViewDef def;
  def.name = name;
  def.spec = std::move(spec);
  def.materialized = materialized;
  def.result_schema = infer_result_schema(def.spec, source_schema(def.spec.source));
  if (materialized) {
    warehouse_.create_collection(name, def.result_schema);
    def = build(std::move(def));
  } else {
    // surfaces type errors now rather than at first use
    evaluate(def.spec, resolve(def.spec.source));
  }
  {
    std::lock_guard lock(mutex_);
    views_.emplace(name, def);
  }
  save();
  return def;
}

std::vector<ViewStatus> ViewRegistry::list() const {
  std::vector<ViewDef> defs;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [n, d] : views_) defs.push_back(d);
  }
  std::vector<ViewStatus> out;
  for (auto& d : defs) {
    bool stale = is_stale(d.name);
    out.push_back({std::move(d), stale});
  }
  return out;
}

bool ViewRegistry::is_stale(const std::string& name) const {
  ViewDef def = get(name);
  if (!def.materialized) return false;
  return def.version_built_at != effective_version(def.spec.source);
}

ViewDef ViewRegistry::refresh(const std::string& name) {
  std::lock_guard writer(registry_writer_);
  ViewDef def = get(name);
  if (!def.materialized) return def;
  def = build(std::move(def));
  {
    std::lock_guard lock(mutex_);
    views_[name] = def;
  }
  save();
  return def;
}

json ViewRegistry::to_json() const {
  std::lock_guard lock(mutex_);
  json out = json::array();
  for (const auto& [n, d] : views_) out.push_back(view_to_json(d));
  return out;
}

void ViewRegistry::load_json(const json& j) {
  std::map<std::string, ViewDef> loaded;
  for (const auto& v : j) {
    ViewDef def = view_from_json(v);
    loaded.emplace(def.name, std::move(def));
  }
  std::lock_guard lock(mutex_);
  views_ = std::move(loaded);
}

void ViewRegistry::save() const {
  auto file = views_file(warehouse_);
  if (!file) return;
  auto tmp = *file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << to_json().dump(2) << '\n';
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, *file);
}

}  // namespace liststand
