#include "liststand/threads.hpp"

#include "liststand/error.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <tuple>

namespace liststand {

ThreadForest build_threads(const std::vector<Message>& messages, const ThreadOptions& options) {
  ThreadForest forest;
  auto& nodes = forest.nodes_;
  nodes.reserve(messages.size());
  forest.by_id_.reserve(messages.size());
  for (std::size_t i = 0; i < messages.size(); ++i) {
    // duplicates beyond the first occurrence are ignored
    if (!forest.by_id_.emplace(messages[i].message_id, nodes.size()).second) continue;
    ForestNode n;
    n.message_id = messages[i].message_id;
    n.message_index = i;
    n.date = messages[i].date;
    nodes.push_back(std::move(n));
  }

  auto earlier = [&](std::size_t a, std::size_t b) {
    return std::tie(nodes[a].date, nodes[a].message_id) < std::tie(nodes[b].date, nodes[b].message_id);
  };

  std::unordered_map<std::string_view, std::size_t> first_by_subject;
  if (options.subject_fallback) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const std::string& subject = messages[nodes[i].message_index].subject_norm;
      if (subject.empty()) continue;
      auto [it, inserted] = first_by_subject.try_emplace(subject, i);
      if (!inserted && earlier(i, it->second)) it->second = i;
    }
  }

  auto lookup = [&](const std::string& id, std::size_t self) -> std::optional<std::size_t> {
    auto it = forest.by_id_.find(id);
    if (it == forest.by_id_.end() || it->second == self) return std::nullopt;
    return it->second;
  };

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Message& m = messages[nodes[i].message_index];
    std::optional<std::size_t> parent;
    if (m.in_reply_to) parent = lookup(*m.in_reply_to, i);
    for (auto r = m.references.rbegin(); !parent && r != m.references.rend(); ++r) parent = lookup(*r, i);
    if (!parent && options.subject_fallback && !m.subject_norm.empty()) {
      std::size_t first = first_by_subject.at(m.subject_norm);
      if (nodes[first].date < nodes[i].date) parent = first;
    }
    nodes[i].parent = parent;
  }

  // Break cycles in the parent function: every node on a cycle becomes a root.
  std::vector<std::uint8_t> state(nodes.size(), 0);  // 0 new, 1 on current walk, 2 done
  std::vector<std::size_t> walk;
  for (std::size_t start = 0; start < nodes.size(); ++start) {
    if (state[start] != 0) continue;
    walk.clear();
    std::optional<std::size_t> cur = start;
    while (cur && state[*cur] == 0) {
      state[*cur] = 1;
      walk.push_back(*cur);
      cur = nodes[*cur].parent;
    }
    if (cur && state[*cur] == 1) {
      auto from = std::find(walk.begin(), walk.end(), *cur);
      for (auto it = from; it != walk.end(); ++it) {
        nodes[*it].parent.reset();
        nodes[*it].cycle_broken = true;
      }
    }
    for (std::size_t n : walk) state[n] = 2;
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].parent) {
      nodes[*nodes[i].parent].children.push_back(i);
    } else {
      forest.roots_.push_back(i);
    }
  }
  for (auto& n : nodes) std::sort(n.children.begin(), n.children.end(), earlier);
  std::sort(forest.roots_.begin(), forest.roots_.end(),
            [&](std::size_t a, std::size_t b) { return nodes[a].message_id < nodes[b].message_id; });
  for (std::size_t r : forest.roots_) {
    for (std::size_t member : forest.thread_members(r)) nodes[member].root = r;
  }
  return forest;
}

const ForestNode* ThreadForest::find(std::string_view message_id) const {
  auto it = by_id_.find(std::string(message_id));
  return it == by_id_.end() ? nullptr : &nodes_[it->second];
}

std::optional<std::string> ThreadForest::parent_of(std::string_view message_id) const {
  const ForestNode* n = find(message_id);
  if (!n || !n->parent) return std::nullopt;
  return nodes_[*n->parent].message_id;
}

std::vector<std::size_t> ThreadForest::thread_members(std::size_t root_index) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{root_index};
  while (!stack.empty()) {
    std::size_t n = stack.back();
    stack.pop_back();
    out.push_back(n);
    const auto& kids = nodes_[n].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::size_t thread_depth(const ThreadForest& forest, std::string_view thread_id) {
  const ForestNode* root = forest.find(thread_id);
  if (!root || root->parent) throw Error(ErrorCode::not_found, "unknown thread: " + std::string(thread_id));
  std::size_t root_index = static_cast<std::size_t>(root - forest.nodes().data());
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{root_index, 1}};
  while (!stack.empty()) {
    auto [n, depth] = stack.back();
    stack.pop_back();
    best = std::max(best, depth);
    for (std::size_t c : forest.node(n).children) stack.emplace_back(c, depth + 1);
  }
  return best;
}

EntityOf entity_lookup(const std::vector<Message>& messages, const EntityCatalog& catalog) {
  auto table = std::make_shared<std::unordered_map<std::string, EntityId>>();
  table->reserve(messages.size());
  for (const auto& m : messages) {
    if (auto id = catalog.entity_of_address(m.from_address)) table->emplace(m.message_id, *id);
  }
  return [table](std::string_view id) -> std::optional<EntityId> {
    auto it = table->find(std::string(id));
    if (it == table->end()) return std::nullopt;
    return it->second;
  };
}

std::vector<ReplyEdge> reply_edges(const ThreadForest& forest, const EntityOf& entity_of) {
  std::vector<ReplyEdge> edges;
  const auto& nodes = forest.nodes();
  auto entity = [&](const ForestNode& n) {
    auto id = entity_of(n.message_id);
    if (!id) throw Error(ErrorCode::not_found, "no entity mapping for message " + n.message_id);
    return *id;
  };
  std::vector<std::size_t> children;
  for (std::size_t root : forest.roots()) {
    children.clear();
    for (std::size_t m : forest.thread_members(root)) {
      if (nodes[m].parent) children.push_back(m);
    }
    std::sort(children.begin(), children.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(nodes[a].date, nodes[a].message_id) < std::tie(nodes[b].date, nodes[b].message_id);
    });
    for (std::size_t c : children) {
      const ForestNode& parent = nodes[*nodes[c].parent];
      edges.push_back({nodes[root].message_id, parent.message_id, nodes[c].message_id, entity(parent),
                       entity(nodes[c])});
    }
  }
  return edges;
}

DiscussionScope parse_discussion_scope(std::string_view s) {
  if (s == "per_thread") return DiscussionScope::per_thread;
  if (s == "corpus") return DiscussionScope::corpus;
  throw Error(ErrorCode::invalid_argument, "unknown discussion scope: " + std::string(s));
}

std::vector<DiscussionPair> discussions(const ThreadForest& forest, const EntityOf& entity_of,
                                        std::size_t threshold, DiscussionScope scope) {
  if (threshold < 1) throw Error(ErrorCode::invalid_argument, "discussion threshold must be >= 1");
  using Directed = std::pair<EntityId, EntityId>;  // (parent entity, child entity)
  struct Tally {
    std::map<Directed, std::size_t> counts;
    std::map<std::pair<EntityId, EntityId>, std::set<std::string>> threads;  // unordered pair
  };
  std::map<std::pair<EntityId, EntityId>, DiscussionPair> result;

  auto emit = [&](const Tally& tally, bool per_thread, const std::string& thread) {
    std::set<std::pair<EntityId, EntityId>> pairs;
    for (const auto& [dir, n] : tally.counts) {
      if (dir.first != dir.second) pairs.insert(std::minmax(dir.first, dir.second));
    }
    for (const auto& pr : pairs) {
      auto get = [&](EntityId x, EntityId y) {
        auto it = tally.counts.find({x, y});
        return it == tally.counts.end() ? std::size_t{0} : it->second;
      };
      std::size_t ab = get(pr.first, pr.second);
      std::size_t ba = get(pr.second, pr.first);
      if (ab < threshold || ba < threshold) continue;
      DiscussionPair& d = result[pr];
      d.a = pr.first;
      d.b = pr.second;
      d.edges_ab += ab;
      d.edges_ba += ba;
      if (per_thread) {
        d.threads.insert(thread);
      } else {
        d.threads = tally.threads.at(pr);
      }
    }
  };

  auto edges = reply_edges(forest, entity_of);
  if (scope == DiscussionScope::per_thread) {
    std::size_t i = 0;
    while (i < edges.size()) {
      Tally tally;
      std::size_t j = i;
      while (j < edges.size() && edges[j].thread_id == edges[i].thread_id) {
        ++tally.counts[{edges[j].parent_entity, edges[j].child_entity}];
        ++j;
      }
      emit(tally, true, edges[i].thread_id);
      i = j;
    }
  } else {
    Tally tally;
    for (const auto& e : edges) {
      ++tally.counts[{e.parent_entity, e.child_entity}];
      if (e.parent_entity != e.child_entity) {
        tally.threads[std::minmax(e.parent_entity, e.child_entity)].insert(e.thread_id);
      }
    }
    emit(tally, false, {});
  }

  std::vector<DiscussionPair> out;
  out.reserve(result.size());
  for (auto& [k, v] : result) out.push_back(std::move(v));
  return out;
}

}  // namespace liststand
