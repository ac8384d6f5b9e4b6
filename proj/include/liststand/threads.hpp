#pragma once

#include "liststand/identity.hpp"
#include "liststand/message.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace liststand {

struct ThreadOptions {
  /// Attach orphans to the earliest earlier message with the same
  /// normalized subject. Off by default: it invents structure.
  bool subject_fallback = false;
};

struct ForestNode {
  std::string message_id;
  std::size_t message_index = 0;  // position in the build_threads input
  Timestamp date{};
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;  // by (date, message_id)
  std::size_t root = 0;
  bool cycle_broken = false;
};

/// Reply forest over a deduplicated corpus. Immutable after construction.
class ThreadForest {
public:
  const std::vector<ForestNode>& nodes() const { return nodes_; }
  /// Root node indices ordered by thread id.
  const std::vector<std::size_t>& roots() const { return roots_; }

  const ForestNode* find(std::string_view message_id) const;
  const ForestNode& node(std::size_t index) const { return nodes_[index]; }
  std::optional<std::string> parent_of(std::string_view message_id) const;
  const std::string& thread_id_of(std::size_t index) const { return nodes_[nodes_[index].root].message_id; }

  /// Members of a thread in depth-first (date-ordered) order.
  std::vector<std::size_t> thread_members(std::size_t root_index) const;
  std::size_t thread_count() const { return roots_.size(); }

private:
  friend ThreadForest build_threads(const std::vector<Message>&, const ThreadOptions&);
  std::vector<ForestNode> nodes_;
  std::vector<std::size_t> roots_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

ThreadForest build_threads(const std::vector<Message>& messages, const ThreadOptions& options = {});

/// Nodes on the longest root-to-leaf path. Error(not_found) unless a root.
std::size_t thread_depth(const ThreadForest& forest, std::string_view thread_id);

/// message_id -> entity; nullopt marks a missing mapping.
using EntityOf = std::function<std::optional<EntityId>(std::string_view message_id)>;

/// Resolves each message's sender through the catalog.
EntityOf entity_lookup(const std::vector<Message>& messages, const EntityCatalog& catalog);

struct ReplyEdge {
  std::string thread_id;
  std::string parent_msg;
  std::string child_msg;
  EntityId parent_entity = 0;
  EntityId child_entity = 0;
  bool operator==(const ReplyEdge&) const = default;
};

/// One edge per non-root message, ordered by thread id then child date.
/// Error(not_found) names the first message without an entity.
std::vector<ReplyEdge> reply_edges(const ThreadForest& forest, const EntityOf& entity_of);

enum class DiscussionScope { per_thread, corpus };

DiscussionScope parse_discussion_scope(std::string_view s);

struct DiscussionPair {
  EntityId a = 0;  // a < b
  EntityId b = 0;
  std::size_t edges_ab = 0;  // a's messages answered by b
  std::size_t edges_ba = 0;
  std::set<std::string> threads;
  bool operator==(const DiscussionPair&) const = default;
};

/// Pairs replying to each other at least `threshold` times in each
/// direction, within one thread (per_thread) or over the corpus. For
/// per_thread the counts sum over the qualifying threads.
std::vector<DiscussionPair> discussions(const ThreadForest& forest, const EntityOf& entity_of,
                                        std::size_t threshold = 2,
                                        DiscussionScope scope = DiscussionScope::per_thread);

}  // namespace liststand
