#include "liststand/export.hpp"

#include "liststand/error.hpp"
#include "liststand/message_io.hpp"
#include "liststand/text.hpp"

namespace liststand {

using json = nlohmann::json;

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

SocialGraph sorted(SocialGraph g) {
  g.sort();
  return g;
}

}  // namespace

const char* to_string(ExportFormat f) {
  switch (f) {
    case ExportFormat::graphml: return "graphml";
    case ExportFormat::dot: return "dot";
    case ExportFormat::pajek: return "pajek";
    case ExportFormat::csv: return "csv";
    case ExportFormat::jsonl: return "jsonl";
    case ExportFormat::canonical_xml: return "canonical_xml";
  }
  return "csv";
}

ExportFormat parse_export_format(std::string_view s) {
  for (auto f : {ExportFormat::graphml, ExportFormat::dot, ExportFormat::pajek, ExportFormat::csv, ExportFormat::jsonl,
                 ExportFormat::canonical_xml}) {
    if (s == to_string(f)) return f;
  }
  if (s == "xml") return ExportFormat::canonical_xml;
  throw Error(ErrorCode::invalid_argument, "unknown export format: " + std::string(s));
}

bool is_graph_format(ExportFormat f) {
  return f == ExportFormat::graphml || f == ExportFormat::dot || f == ExportFormat::pajek;
}

std::string to_graphml(const SocialGraph& graph) {
  SocialGraph g = sorted(graph);
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
      "  <key id=\"institution\" for=\"node\" attr.name=\"institution\" attr.type=\"string\"/>\n"
      "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n"
      "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  for (const auto& n : g.nodes) {
    out += "    <node id=\"n" + std::to_string(n.id) + "\">\n";
    out += "      <data key=\"label\">" + xml_escape(n.label) + "</data>\n";
    if (n.institution) out += "      <data key=\"institution\">" + xml_escape(*n.institution) + "</data>\n";
    out += "    </node>\n";
  }
  for (const auto& e : g.edges) {
    out += "    <edge source=\"n" + std::to_string(e.a) + "\" target=\"n" + std::to_string(e.b) + "\">\n";
    out += "      <data key=\"weight\">" + std::to_string(e.weight) + "</data>\n";
    out += "    </edge>\n";
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

std::string to_dot(const SocialGraph& graph) {
  SocialGraph g = sorted(graph);
  std::string out = "graph G {\n";
  for (const auto& n : g.nodes) {
    out += "  n" + std::to_string(n.id) + " [label=" + dot_quote(n.label);
    if (n.institution) out += ", institution=" + dot_quote(*n.institution);
    out += "];\n";
  }
  for (const auto& e : g.edges) {
    out += "  n" + std::to_string(e.a) + " -- n" + std::to_string(e.b) + " [weight=" + std::to_string(e.weight) + "];\n";
  }
  out += "}\n";
  return out;
}

std::string to_pajek(const SocialGraph& graph) {
  SocialGraph g = sorted(graph);
  std::map<EntityId, std::size_t> position;
  std::string out = "*Vertices " + std::to_string(g.nodes.size()) + "\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    position[g.nodes[i].id] = i + 1;
    std::string label = g.nodes[i].label;
    for (char& c : label) {
      if (c == '"') c = '\'';
      if (c == '\n' || c == '\r') c = ' ';
    }
    out += std::to_string(i + 1) + " \"" + label + "\"\n";
  }
  out += "*Edges\n";
  for (const auto& e : g.edges) {
    out += std::to_string(position.at(e.a)) + " " + std::to_string(position.at(e.b)) + " " + std::to_string(e.weight) + "\n";
  }
  return out;
}

std::string to_csv(const RankedTable& t) {
  std::string out = "key";
  for (const auto& n : t.value_names) out += "," + text::csv_field(n);
  out += "\n";
  for (const auto& r : t.rows) {
    out += text::csv_field(r.key);
    for (auto v : r.values) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

std::string to_csv(const std::vector<RecommendationRow>& rows) {
  std::string out = "institution,type,individuals,rec,notes,drafts\n";
  for (const auto& r : rows) {
    out += text::csv_field(r.institution) + "," + text::csv_field(r.type) + "," + std::to_string(r.individuals) + "," +
           std::to_string(r.rec) + "," + std::to_string(r.notes) + "," + std::to_string(r.drafts) + "\n";
  }
  return out;
}

std::string to_csv(const AnsweringProfile& p) {
  std::string out = "other,replies_to_other,replies_from_other\n";
  for (const auto& r : p.rows) {
    out += std::to_string(r.other) + "," + std::to_string(r.replies_to_other) + "," +
           std::to_string(r.replies_from_other) + "\n";
  }
  return out;
}

std::string to_jsonl(const std::vector<Message>& messages) { return messages_to_jsonl(messages); }

std::string to_canonical_xml(const std::vector<TreeNode>& docs) {
  std::string out;
  for (const auto& d : docs) {
    append_canonical_xml(d, out);
    out += '\n';
  }
  return out;
}

json graph_to_json(const SocialGraph& graph) {
  SocialGraph g = sorted(graph);
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"id", n.id}, {"label", n.label}, {"institution", n.institution ? json(*n.institution) : json(nullptr)}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"weight", e.weight}});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

SocialGraph graph_from_json(const json& j) {
  try {
    SocialGraph g;
    for (const auto& n : j.at("nodes")) {
      GraphNode node{n.at("id").get<EntityId>(), n.value("label", ""), std::nullopt};
      if (n.contains("institution") && !n["institution"].is_null()) node.institution = n["institution"].get<std::string>();
      g.nodes.push_back(std::move(node));
    }
    for (const auto& e : j.at("edges")) {
      g.edges.push_back({e.at("a").get<EntityId>(), e.at("b").get<EntityId>(), e.value("weight", std::int64_t{1})});
    }
    g.sort();
    g.check();
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid graph json: ") + e.what());
  }
}

json table_to_json(const RankedTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back({{"key", r.key}, {"values", r.values}});
  return {{"value_names", t.value_names}, {"rows", std::move(rows)}};
}

RankedTable table_from_json(const json& j) {
  try {
    RankedTable t;
    t.value_names = j.at("value_names").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) t.rows.push_back({r.at("key").get<std::string>(), r.at("values").get<std::vector<std::int64_t>>()});
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid table json: ") + e.what());
  }
}

RankedTable table_from_csv(std::string_view csv) {
  RankedTable t;
  auto lines = text::split(csv, '\n');
  bool header = true;
  for (auto line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = text::parse_csv_line(line);
    if (header) {
      if (fields.empty() || fields[0] != "key") throw Error(ErrorCode::invalid_argument, "csv table must start with a key column");
      t.value_names.assign(fields.begin() + 1, fields.end());
      header = false;
      continue;
    }
    RankedRow row{fields.at(0), {}};
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (!text::is_integer(fields[i])) throw Error(ErrorCode::invalid_argument, "non-integer value: " + fields[i]);
      row.values.push_back(std::stoll(fields[i]));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace liststand
