#pragma once

#include "liststand/analytics.hpp"
#include "liststand/identity.hpp"
#include "liststand/ingest.hpp"
#include "liststand/provenance.hpp"
#include "liststand/query.hpp"
#include "liststand/threads.hpp"
#include "liststand/views.hpp"
#include "liststand/warehouse.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace liststand {

inline constexpr const char* messages_collection = "messages";
inline constexpr const char* facts_collection = "facts";

struct EngineConfig {
  /// In-memory when unset.
  std::optional<std::filesystem::path> data_dir;
  ResolveConfig identity;
  ThreadOptions threads;
  WriterPolicy writer_policy = WriterPolicy::block;
};

/// Messages with their derived entity catalog and reply forest, all built
/// from one version of the messages collection.
struct Corpus {
  std::uint64_t version = 0;
  std::vector<Message> messages;
  EntityCatalog catalog;
  ThreadForest forest;
};

struct IngestReport {
  std::size_t loaded = 0;
  std::size_t stored = 0;
  std::size_t duplicates = 0;  // within the batch and against stored mail
  std::vector<SourceError> errors;
  std::vector<IngestWarning> warnings;
};

struct QueryResult {
  std::vector<TreeNode> documents;
  SchemaDef schema;
};

/// Wires the modules together over one data directory. On open, an
/// `institutions.csv` in the data directory becomes the institution map.
/// Thread-safe; derived data is rebuilt lazily when messages change.
class Engine {
public:
  explicit Engine(EngineConfig config = {});

  Warehouse& warehouse() { return *warehouse_; }
  ViewRegistry& views() { return *views_; }
  const EngineConfig& config() const { return config_; }

  IngestReport ingest(const std::vector<MailboxSource>& sources, const LoadOptions& options = {});
  IngestReport store_messages(std::vector<Message> messages);
  std::shared_ptr<const Corpus> corpus();

  /// kind: posts_per_entity | posts_per_domain | posters_per_domain
  RankedTable stats(std::string_view kind);
  SocialGraph graph(std::int64_t min_weight = 1,
                    CoparticipationWeight weighting = CoparticipationWeight::threads);
  AnsweringProfile profile(EntityId entity);
  std::vector<DiscussionPair> discussions(std::size_t threshold, DiscussionScope scope);

  QueryResult query(const QuerySpec& spec);
  std::optional<SchemaDef> schema_of(const std::string& source);

  std::vector<FactId> assert_facts(std::string_view jsonl);
  FactId assert_fact(Fact fact, std::vector<Attribution> chain);
  std::vector<SourcedFact> known_by(std::string_view agent, Timestamp as_of) const { return facts_.known_by(agent, as_of); }
  const FactStore& facts() const { return facts_; }
  std::vector<RecommendationRow> recommendations() const;

  /// Writes dirty collections; no-op in memory.
  void persist();

private:
  void ensure_collections();
  void save_facts();

  EngineConfig config_;
  std::unique_ptr<Warehouse> warehouse_;
  std::unique_ptr<ViewRegistry> views_;
  FactStore facts_;
  std::mutex ingest_mutex_;
  std::mutex facts_mutex_;
  std::mutex corpus_mutex_;
  std::shared_ptr<const Corpus> corpus_;
};

}  // namespace liststand
