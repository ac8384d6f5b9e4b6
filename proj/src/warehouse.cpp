#include "liststand/warehouse.hpp"

#include "liststand/error.hpp"
#include "liststand/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace liststand {
namespace {

namespace fs = std::filesystem;
constexpr std::string_view kMagic = "liststand-collection 1";
constexpr std::string_view kExtension = ".coll";

std::string describe(const std::vector<Violation>& violations) {
  std::string out = "document does not validate:";
  for (const auto& v : violations) out += " " + v.path + ": " + v.message + ";";
  return out;
}

}  // namespace

bool is_valid_collection_name(std::string_view name) {
  if (name.empty() || name.size() > 128 || name[0] == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

Warehouse::Warehouse(fs::path directory, WriterPolicy policy)
    : directory_(std::move(directory)), policy_(policy) {
  fs::create_directories(*directory_);
  load();
}

void Warehouse::load() {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(*directory_)) {
    if (entry.is_regular_file() && entry.path().extension() == kExtension) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::string line;
    auto bad = [&](const std::string& why) {
      return Error(ErrorCode::io, "corrupt collection file " + file.string() + ": " + why);
    };
    if (!std::getline(in, line) || line != kMagic) throw bad("missing header");
    Collection c;
    if (!std::getline(in, line) || !text::starts_with(line, "name ")) throw bad("missing name");
    c.name = line.substr(5);
    if (!std::getline(in, line) || !text::starts_with(line, "version ")) throw bad("missing version");
    c.version = std::stoull(line.substr(8));
    if (!std::getline(in, line) || !text::starts_with(line, "next ")) throw bad("missing sequence");
    c.next_sequence = std::stoull(line.substr(5));
    if (!std::getline(in, line) || !text::starts_with(line, "schema ")) throw bad("missing schema");
    std::string schema_text = line.substr(7);
    if (schema_text != "-") c.schema = schema_from_json(nlohmann::json::parse(schema_text));
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      c.documents.push_back(std::make_shared<const TreeNode>(parse_xml(line)));
    }
    std::string name = c.name;
    collections_.emplace(std::move(name), std::move(c));
  }
}

Warehouse::Collection& Warehouse::find_locked(const std::string& name) {
  auto it = collections_.find(name);
  if (it == collections_.end()) throw Error(ErrorCode::not_found, "unknown collection: " + name);
  return it->second;
}

const Warehouse::Collection& Warehouse::find_locked(const std::string& name) const {
  auto it = collections_.find(name);
  if (it == collections_.end()) throw Error(ErrorCode::not_found, "unknown collection: " + name);
  return it->second;
}

std::unique_lock<std::timed_mutex> Warehouse::acquire_writer(const std::string& name) {
  std::timed_mutex* writer = nullptr;
  {
    std::shared_lock lock(mutex_);
    writer = find_locked(name).writer.get();
  }
  std::unique_lock<std::timed_mutex> guard(*writer, std::defer_lock);
  if (policy_ == WriterPolicy::fail_fast) {
    if (!guard.try_lock()) throw Error(ErrorCode::conflict, "collection " + name + " has an active writer");
  } else {
    guard.lock();
  }
  return guard;
}

void Warehouse::create_collection(const std::string& name, std::optional<SchemaDef> schema) {
  if (!is_valid_collection_name(name)) throw Error(ErrorCode::invalid_argument, "invalid collection name: " + name);
  if (schema) {
    auto errors = schema->consistency_errors();
    if (!errors.empty()) throw Error(ErrorCode::invalid_argument, "invalid schema: " + errors.front());
  }
  std::unique_lock lock(mutex_);
  if (collections_.count(name)) throw Error(ErrorCode::conflict, "collection already exists: " + name);
  Collection c;
  c.name = name;
  c.schema = std::move(schema);
  c.dirty = true;
  collections_.emplace(name, std::move(c));
}

bool Warehouse::has_collection(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return collections_.count(name) != 0;
}

std::vector<std::string> Warehouse::collection_names() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> names;
  for (const auto& [name, c] : collections_) names.push_back(name);
  return names;
}

DocumentId Warehouse::store(const std::string& name, TreeNode doc) {
  std::vector<TreeNode> one;
  one.push_back(std::move(doc));
  return store_all(name, std::move(one)).front();
}

std::vector<DocumentId> Warehouse::store_all(const std::string& name, std::vector<TreeNode> docs) {
  auto writer = acquire_writer(name);
  std::optional<SchemaDef> schema = this->schema(name);
  for (const auto& doc : docs) {
    check_well_formed(doc);
    if (schema) {
      auto violations = validate(doc, *schema);
      if (!violations.empty()) throw Error(ErrorCode::rejected, describe(violations));
    }
  }
  std::unique_lock lock(mutex_);
  Collection& c = find_locked(name);
  std::vector<DocumentId> ids;
  ids.reserve(docs.size());
  for (auto& doc : docs) {
    ids.push_back({name, c.next_sequence++});
    c.documents.push_back(std::make_shared<const TreeNode>(std::move(doc)));
    ++c.version;
  }
  c.dirty = true;
  return ids;
}

void Warehouse::replace(const std::string& name, std::vector<TreeNode> docs) {
  auto writer = acquire_writer(name);
  std::optional<SchemaDef> schema = this->schema(name);
  std::vector<DocumentPtr> fresh;
  fresh.reserve(docs.size());
  for (auto& doc : docs) {
    check_well_formed(doc);
    if (schema) {
      auto violations = validate(doc, *schema);
      if (!violations.empty()) throw Error(ErrorCode::rejected, describe(violations));
    }
    fresh.push_back(std::make_shared<const TreeNode>(std::move(doc)));
  }
  std::unique_lock lock(mutex_);
  Collection& c = find_locked(name);
  c.next_sequence += fresh.size();
  c.documents = std::move(fresh);
  ++c.version;
  c.dirty = true;
}

Snapshot Warehouse::snapshot(const std::string& name) const {
  std::shared_lock lock(mutex_);
  const Collection& c = find_locked(name);
  return Snapshot{c.name, c.version, c.schema, c.documents};
}

std::uint64_t Warehouse::version(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return find_locked(name).version;
}

std::optional<SchemaDef> Warehouse::schema(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return find_locked(name).schema;
}

void Warehouse::persist() {
  if (!directory_) return;
  std::vector<Snapshot> dirty;
  std::vector<std::uint64_t> next;
  {
    std::unique_lock lock(mutex_);
    for (auto& [name, c] : collections_) {
      if (!c.dirty) continue;
      dirty.push_back(Snapshot{c.name, c.version, c.schema, c.documents});
      next.push_back(c.next_sequence);
      c.dirty = false;
    }
  }
  for (std::size_t i = 0; i < dirty.size(); ++i) {
    const Snapshot& snap = dirty[i];
    fs::path target = *directory_ / (snap.collection + std::string(kExtension));
    fs::path temp = target;
    temp += ".tmp";
    {
      std::ofstream out(temp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::io, "cannot write " + temp.string());
      out << kMagic << '\n'
          << "name " << snap.collection << '\n'
          << "version " << snap.version << '\n'
          << "next " << next[i] << '\n'
          << "schema " << (snap.schema ? schema_to_json(*snap.schema).dump() : std::string("-")) << '\n';
      std::string line;
      for (const auto& doc : snap.documents) {
        line.clear();
        append_canonical_xml(*doc, line);
        line.push_back('\n');
        out << line;
      }
      out.flush();
      if (!out) throw Error(ErrorCode::io, "write failed for " + temp.string());
    }
    fs::rename(temp, target);
  }
}

}  // namespace liststand
