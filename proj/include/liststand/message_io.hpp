#pragma once

#include "liststand/identity.hpp"
#include "liststand/message.hpp"
#include "liststand/schema.hpp"
#include "liststand/threads.hpp"
#include "liststand/tree.hpp"

#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace liststand {

nlohmann::json message_to_json(const Message& m);
Message message_from_json(const nlohmann::json& j);
/// Blank lines are skipped; errors name the line number.
std::vector<Message> messages_from_jsonl(std::string_view text);
std::string messages_to_jsonl(const std::vector<Message>& messages);

/// A <message source=".." offset=".."> document.
TreeNode message_to_tree(const Message& m);
Message message_from_tree(const TreeNode& doc);
/// Schema of message_to_tree output.
SchemaDef message_schema();

nlohmann::json entities_to_json(const EntityCatalog& catalog);
EntityCatalog entities_from_json(const nlohmann::json& j);

nlohmann::json forest_to_json(const ThreadForest& forest);
nlohmann::json discussions_to_json(const std::vector<DiscussionPair>& pairs);

}  // namespace liststand
