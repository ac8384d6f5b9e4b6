#pragma once
// Generators and brute-force oracles shared by unit and acceptance tests.

#include "liststand/analytics.hpp"
#include "liststand/identity.hpp"
#include "liststand/message.hpp"
#include "liststand/query.hpp"
#include "liststand/schema.hpp"
#include "liststand/threads.hpp"
#include "liststand/tree.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace support {

using namespace liststand;
using Rng = std::mt19937_64;

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive
bool chance(Rng& rng, double p);

Message make_message(std::string id, std::string from, Timestamp date,
                     std::optional<std::string> in_reply_to = std::nullopt,
                     std::vector<std::string> references = {}, std::string subject = "topic");

/// Messages with a known reply structure, shuffled. `parent` is the forest
/// a correct threader must build; `dangling` counts messages carrying a
/// reference to an id absent from the corpus.
struct PlantedCorpus {
  std::vector<Message> messages;
  std::map<std::string, std::optional<std::string>> parent;
  std::map<std::string, std::string> sender;  // message id -> address
  std::size_t dangling = 0;
};
PlantedCorpus planted_corpus(Rng& rng, std::size_t max_messages = 200, double dangling_rate = 0.1);

std::map<std::string, std::optional<std::string>> forest_parents(const ThreadForest& forest);

/// Pairs in discussion, by direct enumeration of entity pairs and parent
/// links. Threads are found by walking `parent` to its roots.
std::vector<DiscussionPair> brute_discussions(const std::map<std::string, std::optional<std::string>>& parent,
                                              const std::map<std::string, EntityId>& entity, std::size_t threshold,
                                              bool per_thread);

/// Random corpus with display names that trigger identity merges and
/// several domains; reply links via In-Reply-To.
std::vector<Message> analytics_fixture(Rng& rng, std::size_t max_messages = 200);

RankedTable brute_posts_per_entity(const std::vector<Message>& ms, const EntityCatalog& catalog);
RankedTable brute_posts_per_domain(const std::vector<Message>& ms, const InstitutionMap& map);
RankedTable brute_posters_per_domain(const std::vector<Message>& ms, const EntityCatalog& catalog,
                                     const InstitutionMap& map);
/// Edge weights keyed by (a, b), distinct shared threads.
std::map<std::pair<EntityId, EntityId>, std::int64_t> brute_coparticipation(const std::vector<Message>& ms,
                                                                           const EntityCatalog& catalog);
std::map<EntityId, std::pair<std::int64_t, std::int64_t>> brute_profile(EntityId subject, const std::vector<Message>& ms,
                                                                         const EntityCatalog& catalog);

/// person{@id int, @dept string?}: name, age?, email*, address?{city, zip?}
SchemaDef people_schema();
std::vector<TreeNode> people_documents(Rng& rng, std::size_t n);
/// Well-formed and type-correct against people_schema (or the message
/// schema when `messages` is true).
QuerySpec random_spec(Rng& rng, const std::string& source, bool messages = false);

SocialGraph random_graph(Rng& rng);
/// Test-only GraphML reader for the subset the exporter writes.
SocialGraph read_graphml(const std::string& text);
/// Checks `graph ID { stmt* }` with node/edge statements and attribute
/// lists, as a DOT grammar subset. Returns an error message or "".
std::string check_dot(const std::string& text);

/// JSON lines reproducing every row of a published recommendation table,
/// keyed the way recommendation_table reads facts.
std::string rec_fixture_facts_jsonl();
InstitutionMap rec_fixture_institutions();

struct TempDir {
  std::filesystem::path path;
  TempDir();
  ~TempDir();
};

}  // namespace support
