#include "liststand/engine.hpp"

#include "liststand/error.hpp"
#include "liststand/message_io.hpp"

#include <unordered_set>

namespace liststand {

Engine::Engine(EngineConfig config) : config_(std::move(config)) {
  if (config_.data_dir) {
    std::filesystem::create_directories(*config_.data_dir);
    warehouse_ = std::make_unique<Warehouse>(*config_.data_dir, config_.writer_policy);
    auto map = *config_.data_dir / "institutions.csv";
    if (config_.identity.institutions.rules.empty() && std::filesystem::exists(map)) {
      config_.identity.institutions = InstitutionMap::load(map.string());
    }
  } else {
    warehouse_ = std::make_unique<Warehouse>();
  }
  ensure_collections();
  views_ = std::make_unique<ViewRegistry>(*warehouse_);
  facts_ = FactStore::load_from(*warehouse_, facts_collection);
}

void Engine::ensure_collections() {
  if (!warehouse_->has_collection(messages_collection)) warehouse_->create_collection(messages_collection, message_schema());
  if (!warehouse_->has_collection(facts_collection)) warehouse_->create_collection(facts_collection);
}

IngestReport Engine::ingest(const std::vector<MailboxSource>& sources, const LoadOptions& options) {
  LoadResult loaded = load_sources(sources, options);
  IngestReport report = store_messages(std::move(loaded.messages));
  report.duplicates += loaded.duplicates;
  report.loaded += loaded.duplicates;
  report.errors = std::move(loaded.errors);
  report.warnings = std::move(loaded.warnings);
  return report;
}

IngestReport Engine::store_messages(std::vector<Message> messages) {
  std::lock_guard lock(ingest_mutex_);
  IngestReport report;
  report.loaded = messages.size();
  DedupeResult batch = dedupe(std::move(messages));
  report.duplicates = batch.duplicates;

  std::unordered_set<std::string> known;
  for (const auto& doc : warehouse_->snapshot(messages_collection).documents) {
    if (const TreeNode* id = doc->child("message_id")) known.insert(id->text.value_or(""));
  }
  std::vector<TreeNode> fresh;
  for (const auto& m : batch.messages) {
    if (!known.insert(m.message_id).second) {
      ++report.duplicates;
      continue;
    }
    fresh.push_back(message_to_tree(m));
  }
  report.stored = fresh.size();
  if (!fresh.empty()) warehouse_->store_all(messages_collection, std::move(fresh));
  persist();
  return report;
}

std::shared_ptr<const Corpus> Engine::corpus() {
  std::lock_guard lock(corpus_mutex_);
  Snapshot snap = warehouse_->snapshot(messages_collection);
  if (corpus_ && corpus_->version == snap.version) return corpus_;
  auto c = std::make_shared<Corpus>();
  c->version = snap.version;
  c->messages.reserve(snap.size());
  for (const auto& doc : snap.documents) c->messages.push_back(message_from_tree(*doc));
  c->catalog = resolve_entities(c->messages, config_.identity);
  c->forest = build_threads(c->messages, config_.threads);
  corpus_ = std::move(c);
  return corpus_;
}

RankedTable Engine::stats(std::string_view kind) {
  auto c = corpus();
  if (kind == "posts_per_entity") return posts_per_entity(c->messages, c->catalog);
  if (kind == "posts_per_domain") return posts_per_domain(c->messages, config_.identity.institutions);
  if (kind == "posters_per_domain") return posters_per_domain(c->messages, c->catalog, config_.identity.institutions);
  throw Error(ErrorCode::invalid_argument, "unknown stats kind: " + std::string(kind));
}

SocialGraph Engine::graph(std::int64_t min_weight, CoparticipationWeight weighting) {
  auto c = corpus();
  GraphOptions options;
  options.min_weight = min_weight;
  options.weighting = weighting;
  options.institutions = config_.identity.institutions;
  return coparticipation_graph(c->messages, c->forest, c->catalog, options);
}

AnsweringProfile Engine::profile(EntityId entity) {
  auto c = corpus();
  return answering_profile(entity, c->messages, c->forest, c->catalog);
}

std::vector<DiscussionPair> Engine::discussions(std::size_t threshold, DiscussionScope scope) {
  auto c = corpus();
  return liststand::discussions(c->forest, entity_lookup(c->messages, c->catalog), threshold, scope);
}

std::optional<SchemaDef> Engine::schema_of(const std::string& source) {
  if (views_->has_view(source)) return views_->get(source).result_schema;
  if (!warehouse_->has_collection(source)) throw Error(ErrorCode::not_found, "no such collection: " + source);
  return warehouse_->schema(source);
}

QueryResult Engine::query(const QuerySpec& spec) {
  check_well_formed(spec);
  ResolvedSource source = views_->resolve(spec.source);
  QueryResult out;
  out.schema = infer_result_schema(spec, source.schema);
  out.documents = evaluate(spec, source);
  return out;
}

std::vector<FactId> Engine::assert_facts(std::string_view jsonl) {
  std::lock_guard lock(facts_mutex_);
  auto ids = assert_jsonl(facts_, jsonl);
  save_facts();
  return ids;
}

FactId Engine::assert_fact(Fact fact, std::vector<Attribution> chain) {
  std::lock_guard lock(facts_mutex_);
  FactId id = facts_.assert_fact(std::move(fact), std::move(chain), ChainPolicy::researcher);
  save_facts();
  return id;
}

void Engine::save_facts() {
  facts_.save_to(*warehouse_, facts_collection);
  persist();
}

std::vector<RecommendationRow> Engine::recommendations() const {
  return recommendation_table(facts_, config_.identity.institutions);
}

void Engine::persist() { warehouse_->persist(); }

}  // namespace liststand
