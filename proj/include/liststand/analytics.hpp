#pragma once

#include "liststand/identity.hpp"
#include "liststand/message.hpp"
#include "liststand/provenance.hpp"
#include "liststand/threads.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace liststand {

struct RankedRow {
  std::string key;
  std::vector<std::int64_t> values;
  bool operator==(const RankedRow&) const = default;
};

/// Rows ordered by the first value descending, then key ascending.
struct RankedTable {
  std::vector<std::string> value_names;
  std::vector<RankedRow> rows;

  void sort();
  RankedTable top(std::size_t k) const;
  /// Keys replaced by rank labels "1.", "2.", ... in row order.
  RankedTable anonymized() const;
  bool operator==(const RankedTable&) const = default;
};

/// Keys are entity keys (smallest address). Error(not_found) if a sender
/// is not in the catalog.
RankedTable posts_per_entity(const std::vector<Message>& messages, const EntityCatalog& catalog);
RankedTable posts_per_domain(const std::vector<Message>& messages, const InstitutionMap& institutions = {});
/// Values (posters, posts) per mapped domain.
RankedTable posters_per_domain(const std::vector<Message>& messages, const EntityCatalog& catalog,
                               const InstitutionMap& institutions = {});

struct GraphNode {
  EntityId id = 0;
  std::string label;
  std::optional<std::string> institution;
  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  EntityId a = 0;  // a < b
  EntityId b = 0;
  std::int64_t weight = 1;
  bool operator==(const GraphEdge&) const = default;
};

/// Undirected; nodes sorted by id, edges by (a, b).
struct SocialGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  /// Throws Error(invalid_argument) on self-loops, dangling endpoints,
  /// unordered pairs, non-positive weights or duplicates.
  void check() const;
  void sort();
  bool operator==(const SocialGraph&) const = default;
};

enum class CoparticipationWeight {
  threads,        // distinct shared threads
  message_pairs,  // sum over shared threads of posts(a) * posts(b)
};

struct GraphOptions {
  std::int64_t min_weight = 1;
  CoparticipationWeight weighting = CoparticipationWeight::threads;
  InstitutionMap institutions;
};

/// `forest` must be built from `messages`.
SocialGraph coparticipation_graph(const std::vector<Message>& messages, const ThreadForest& forest,
                                  const EntityCatalog& catalog, const GraphOptions& options = {});

struct ProfileRow {
  EntityId other = 0;
  std::int64_t replies_to_other = 0;    // subject answered other
  std::int64_t replies_from_other = 0;  // other answered subject
  bool operator==(const ProfileRow&) const = default;
};

struct AnsweringProfile {
  EntityId subject = 0;
  std::vector<ProfileRow> rows;  // total descending, then other ascending
  bool operator==(const AnsweringProfile&) const = default;
};

/// Error(not_found) if `subject` is not in the catalog.
AnsweringProfile answering_profile(EntityId subject, const std::vector<Message>& messages,
                                   const ThreadForest& forest, const EntityCatalog& catalog);

struct RecommendationRow {
  std::string institution;
  std::string type;
  std::int64_t individuals = 0;
  std::int64_t rec = 0;
  std::int64_t notes = 0;
  std::int64_t drafts = 0;
  bool operator==(const RecommendationRow&) const = default;
};

/// Reads facts of the forms
///   (person, "authored", "REC:<doc>" | "NOTE:<doc>" | "WD:<doc>")
///   (person, "affiliated_with", <institution or domain>)
///   (institution, "institution_type", <type>)
/// A person with several affiliations is counted at the latest one dated at
/// or before the authoring event (else the earliest). Unaffiliated authors
/// land in "Unknown" with type "n.a.". Rows by REC descending, then name.
std::vector<RecommendationRow> recommendation_table(const FactStore& facts, const InstitutionMap& institutions = {});

}  // namespace liststand
