#pragma once

#include "liststand/timestamp.hpp"
#include "liststand/tree.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace liststand {

class Warehouse;

/// The innermost asserted event: subject predicate object [at event_time].
struct Fact {
  std::string subject;
  std::string predicate;
  std::string object;
  std::optional<Timestamp> event_time;
  bool operator==(const Fact&) const = default;
};

enum class AttributionKind { published, learned, observed };

const char* to_string(AttributionKind kind);
AttributionKind parse_attribution_kind(std::string_view s);

struct Attribution {
  std::string agent;
  AttributionKind kind = AttributionKind::observed;
  Timestamp time{};
  bool operator==(const Attribution&) const = default;
};

using FactId = std::int64_t;

/// A fact with the chain through which it reached the warehouse, innermost
/// (closest to the event) first, final observer last.
struct SourcedFact {
  FactId fact_id = 0;
  Fact fact;
  std::vector<Attribution> chain;

  const Attribution& outermost() const { return chain.back(); }
  bool operator==(const SourcedFact&) const = default;
};

enum class ChainPolicy {
  any,
  /// Manual entry by a researcher: the outermost link must be learned/observed.
  researcher,
};

/// Append-only store of sourced facts. Readers see a consistent prefix.
class FactStore {
public:
  FactStore() = default;
  FactStore(const FactStore& other);
  FactStore& operator=(const FactStore& other);

  /// Throws Error(rejected) for an empty or time-decreasing chain.
  FactId assert_fact(Fact fact, std::vector<Attribution> chain, ChainPolicy policy = ChainPolicy::any);

  /// Facts whose outermost attribution is `agent` at or before `as_of`.
  std::vector<SourcedFact> known_by(std::string_view agent, Timestamp as_of) const;
  /// Facts with `agent` anywhere in their chain.
  std::vector<SourcedFact> via_source(std::string_view agent) const;
  /// Facts with event_time in [from, to]; Error(invalid_argument) if from > to.
  std::vector<SourcedFact> events_between(Timestamp from, Timestamp to) const;

  std::vector<SourcedFact> all() const;
  std::size_t size() const;

  /// Each fact as one document of the "facts" collection.
  void save_to(Warehouse& warehouse, const std::string& collection = "facts") const;
  static FactStore load_from(const Warehouse& warehouse, const std::string& collection = "facts");

private:
  template <typename Pred>
  std::vector<SourcedFact> select(Pred pred) const;

  mutable std::shared_mutex mutex_;
  std::vector<SourcedFact> facts_;
};

TreeNode fact_to_tree(const SourcedFact& f);
SourcedFact fact_from_tree(const TreeNode& node);

/// JSON-lines entry `{"fact": {...}, "chain": [...]}`.
nlohmann::json fact_to_json(const SourcedFact& f);
std::pair<Fact, std::vector<Attribution>> fact_entry_from_json(const nlohmann::json& j);

/// Asserts every line with ChainPolicy::researcher; returns the new ids.
/// Throws Error naming the line number on the first bad entry.
std::vector<FactId> assert_jsonl(FactStore& store, std::string_view jsonl);

}  // namespace liststand
