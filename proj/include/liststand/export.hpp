#pragma once

#include "liststand/analytics.hpp"
#include "liststand/message.hpp"
#include "liststand/tree.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace liststand {

enum class ExportFormat { graphml, dot, pajek, csv, jsonl, canonical_xml };
const char* to_string(ExportFormat f);
ExportFormat parse_export_format(std::string_view s);
bool is_graph_format(ExportFormat f);

// Graph writers sort a copy of the graph first, so output is byte-stable.
std::string to_graphml(const SocialGraph& g);
std::string to_dot(const SocialGraph& g);
std::string to_pajek(const SocialGraph& g);

std::string to_csv(const RankedTable& t);
std::string to_csv(const std::vector<RecommendationRow>& rows);
std::string to_csv(const AnsweringProfile& p);
std::string to_jsonl(const std::vector<Message>& messages);
/// One canonical document per line.
std::string to_canonical_xml(const std::vector<TreeNode>& docs);

nlohmann::json graph_to_json(const SocialGraph& g);
SocialGraph graph_from_json(const nlohmann::json& j);
nlohmann::json table_to_json(const RankedTable& t);
RankedTable table_from_json(const nlohmann::json& j);
/// Accepts the CSV produced by to_csv(RankedTable).
RankedTable table_from_csv(std::string_view csv);

}  // namespace liststand
