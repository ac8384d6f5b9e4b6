#include "liststand/message_io.hpp"

#include "liststand/error.hpp"
#include "liststand/text.hpp"

namespace liststand {

using json = nlohmann::json;

json message_to_json(const Message& m) {
  return {{"message_id", m.message_id},
          {"in_reply_to", m.in_reply_to ? json(*m.in_reply_to) : json(nullptr)},
          {"references", m.references},
          {"from_display", m.from_display ? json(*m.from_display) : json(nullptr)},
          {"from_address", m.from_address},
          {"date", format_iso8601(m.date)},
          {"subject_raw", m.subject_raw},
          {"subject_norm", m.subject_norm},
          {"body_text", m.body_text},
          {"source_id", m.source_id},
          {"offset", m.offset},
          {"flags", m.flags}};
}

Message message_from_json(const json& j) {
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
  };
  try {
    Message m;
    m.message_id = j.at("message_id").get<std::string>();
    m.in_reply_to = opt("in_reply_to");
    if (j.contains("references")) m.references = j["references"].get<std::vector<std::string>>();
    m.from_display = opt("from_display");
    m.from_address = j.at("from_address").get<std::string>();
    auto date = parse_iso8601(j.at("date").get<std::string>());
    if (!date) throw Error(ErrorCode::invalid_argument, "bad date: " + j.at("date").get<std::string>());
    m.date = *date;
    m.subject_raw = j.value("subject_raw", "");
    m.subject_norm = j.value("subject_norm", "");
    m.body_text = j.value("body_text", "");
    m.source_id = j.value("source_id", "");
    m.offset = j.value("offset", std::uint64_t{0});
    if (j.contains("flags")) m.flags = j["flags"].get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid message json: ") + e.what());
  }
}

std::vector<Message> messages_from_jsonl(std::string_view text) {
  std::vector<Message> out;
  std::size_t line_no = 0;
  for (const auto& line : text::split(text, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(message_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::invalid_argument, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string messages_to_jsonl(const std::vector<Message>& messages) {
  std::string out;
  for (const auto& m : messages) {
    out += message_to_json(m).dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

TreeNode message_to_tree(const Message& m) {
  TreeNode doc("message");
  doc.set("source", m.source_id);
  doc.set("offset", std::to_string(m.offset));
  doc.add(TreeNode::leaf("message_id", m.message_id));
  if (m.in_reply_to) doc.add(TreeNode::leaf("in_reply_to", *m.in_reply_to));
  TreeNode refs("references");
  for (const auto& r : m.references) refs.add(TreeNode::leaf("ref", r));
  doc.add(std::move(refs));
  if (m.from_display) doc.add(TreeNode::leaf("from_display", *m.from_display));
  doc.add(TreeNode::leaf("from_address", m.from_address));
  doc.add(TreeNode::leaf("date", format_iso8601(m.date)));
  doc.add(TreeNode::leaf("subject_raw", m.subject_raw));
  doc.add(TreeNode::leaf("subject_norm", m.subject_norm));
  doc.add(TreeNode::leaf("body_text", m.body_text));
  for (const auto& f : m.flags) doc.add(TreeNode::leaf("flag", f));
  return doc;
}

Message message_from_tree(const TreeNode& doc) {
  if (doc.name != "message") throw Error(ErrorCode::invalid_argument, "expected <message>, got <" + doc.name + ">");
  Message m;
  auto attr = [&](const char* k) {
    auto it = doc.attributes.find(k);
    return it == doc.attributes.end() ? std::string() : it->second;
  };
  m.source_id = attr("source");
  std::string off = attr("offset");
  m.offset = text::is_integer(off) ? std::stoull(off) : 0;
  for (const auto& c : doc.children) {
    const std::string v = c.text.value_or("");
    if (c.name == "message_id") m.message_id = v;
    else if (c.name == "in_reply_to") m.in_reply_to = v;
    else if (c.name == "references") {
      for (const auto& r : c.children) m.references.push_back(r.text.value_or(""));
    } else if (c.name == "from_display") m.from_display = v;
    else if (c.name == "from_address") m.from_address = v;
    else if (c.name == "date") m.date = parse_iso8601(v).value_or(Timestamp{});
    else if (c.name == "subject_raw") m.subject_raw = v;
    else if (c.name == "subject_norm") m.subject_norm = v;
    else if (c.name == "body_text") m.body_text = v;
    else if (c.name == "flag") m.flags.push_back(v);
  }
  return m;
}

SchemaDef message_schema() {
  SchemaDef s;
  s.root_name = "message";
  ElementDecl msg;
  msg.attributes = {{"offset", ValueType::integer, true}, {"source", ValueType::string, true}};
  msg.children = {{"message_id", Cardinality::one},   {"in_reply_to", Cardinality::optional},
                  {"references", Cardinality::one},   {"from_display", Cardinality::optional},
                  {"from_address", Cardinality::one}, {"date", Cardinality::one},
                  {"subject_raw", Cardinality::one},  {"subject_norm", Cardinality::one},
                  {"body_text", Cardinality::one},    {"flag", Cardinality::many}};
  s.elements["message"] = msg;
  ElementDecl refs;
  refs.children = {{"ref", Cardinality::many}};
  s.elements["references"] = refs;
  auto leaf = [](ValueType t) {
    ElementDecl d;
    d.content = t;
    return d;
  };
  for (const char* n : {"message_id", "in_reply_to", "ref", "from_display", "from_address", "subject_raw",
                        "subject_norm", "body_text", "flag"}) {
    s.elements[n] = leaf(ValueType::string);
  }
  s.elements["date"] = leaf(ValueType::date);
  return s;
}

json entities_to_json(const EntityCatalog& catalog) {
  json list = json::array();
  for (const auto& e : catalog.entities()) {
    json addrs = json::array();
    for (const auto& a : e.addresses) addrs.push_back(a.to_string());
    json ev = json::array();
    for (const auto& x : e.evidence) ev.push_back({{"rule", x.rule}, {"a", x.a}, {"b", x.b}});
    list.push_back({{"entity_id", e.entity_id},
                    {"addresses", std::move(addrs)},
                    {"canonical_name", e.canonical_name ? json(*e.canonical_name) : json(nullptr)},
                    {"evidence", std::move(ev)}});
  }
  return {{"entities", std::move(list)}};
}

EntityCatalog entities_from_json(const json& j) {
  try {
    std::vector<Entity> entities;
    for (const auto& e : j.at("entities")) {
      Entity x;
      x.entity_id = e.at("entity_id").get<EntityId>();
      for (const auto& a : e.at("addresses")) x.addresses.push_back(normalize_address(a.get<std::string>(), false));
      if (e.contains("canonical_name") && !e["canonical_name"].is_null()) {
        x.canonical_name = e["canonical_name"].get<std::string>();
      }
      if (e.contains("evidence")) {
        for (const auto& v : e["evidence"]) {
          x.evidence.push_back({v.at("rule").get<std::string>(), v.at("a").get<std::string>(), v.at("b").get<std::string>()});
        }
      }
      entities.push_back(std::move(x));
    }
    return EntityCatalog(std::move(entities));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("invalid entities json: ") + e.what());
  }
}

json forest_to_json(const ThreadForest& forest) {
  json threads = json::array();
  for (std::size_t root : forest.roots()) {
    json members = json::array();
    for (std::size_t n : forest.thread_members(root)) {
      const ForestNode& node = forest.node(n);
      members.push_back({{"message_id", node.message_id},
                         {"parent", node.parent ? json(forest.node(*node.parent).message_id) : json(nullptr)},
                         {"date", format_iso8601(node.date)},
                         {"cycle_broken", node.cycle_broken}});
    }
    threads.push_back({{"thread_id", forest.node(root).message_id},
                       {"depth", thread_depth(forest, forest.node(root).message_id)},
                       {"size", members.size()},
                       {"messages", std::move(members)}});
  }
  return {{"threads", std::move(threads)}};
}

json discussions_to_json(const std::vector<DiscussionPair>& pairs) {
  json out = json::array();
  for (const auto& p : pairs) {
    out.push_back({{"a", p.a}, {"b", p.b}, {"edges_ab", p.edges_ab}, {"edges_ba", p.edges_ba},
                   {"threads", std::vector<std::string>(p.threads.begin(), p.threads.end())}});
  }
  return {{"pairs", std::move(out)}};
}

}  // namespace liststand
