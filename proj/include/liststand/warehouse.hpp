#pragma once

#include "liststand/schema.hpp"
#include "liststand/tree.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace liststand {

struct DocumentId {
  std::string collection;
  std::uint64_t sequence = 0;
  bool operator==(const DocumentId&) const = default;
};

using DocumentPtr = std::shared_ptr<const TreeNode>;

/// Immutable view of a collection at one version.
struct Snapshot {
  std::string collection;
  std::uint64_t version = 0;
  std::optional<SchemaDef> schema;
  std::vector<DocumentPtr> documents;

  std::size_t size() const { return documents.size(); }
  const TreeNode& operator[](std::size_t i) const { return *documents[i]; }
};

enum class WriterPolicy { block, fail_fast };

/// Named document collections with optional schemas. Readers take
/// snapshots; each collection admits one writer at a time. When opened on a
/// directory, persist() rewrites changed collections atomically.
class Warehouse {
public:
  Warehouse() = default;
  explicit Warehouse(std::filesystem::path directory, WriterPolicy policy = WriterPolicy::block);

  Warehouse(const Warehouse&) = delete;
  Warehouse& operator=(const Warehouse&) = delete;

  void create_collection(const std::string& name, std::optional<SchemaDef> schema = std::nullopt);
  bool has_collection(const std::string& name) const;
  std::vector<std::string> collection_names() const;

  /// Rejects with Error(rejected) listing violations when the collection has
  /// a schema the document fails; the version is then unchanged.
  DocumentId store(const std::string& name, TreeNode doc);
  /// Validates all documents first; on success each counts as one mutation.
  std::vector<DocumentId> store_all(const std::string& name, std::vector<TreeNode> docs);
  /// Swaps the whole content (view refresh). One mutation.
  void replace(const std::string& name, std::vector<TreeNode> docs);

  Snapshot snapshot(const std::string& name) const;
  std::uint64_t version(const std::string& name) const;
  std::optional<SchemaDef> schema(const std::string& name) const;

  const std::optional<std::filesystem::path>& directory() const { return directory_; }
  void persist();

private:
  struct Collection {
    std::string name;
    std::optional<SchemaDef> schema;
    std::vector<DocumentPtr> documents;
    std::uint64_t version = 0;
    std::uint64_t next_sequence = 0;
    bool dirty = false;
    std::unique_ptr<std::timed_mutex> writer = std::make_unique<std::timed_mutex>();
  };

  Collection& find_locked(const std::string& name);
  const Collection& find_locked(const std::string& name) const;
  std::unique_lock<std::timed_mutex> acquire_writer(const std::string& name);
  void load();

  std::optional<std::filesystem::path> directory_;
  WriterPolicy policy_ = WriterPolicy::block;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Collection> collections_;
};

bool is_valid_collection_name(std::string_view name);

}  // namespace liststand
