#include "liststand/tree.hpp"

#include "liststand/error.hpp"

#include <cctype>
#include <cstdint>

namespace liststand {
namespace {

void escape_into(std::string_view s, std::string& out, bool attribute) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
        } else {
          out.push_back(c);
        }
        break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out.push_back(c);
    }
  }
}

void append_utf8(std::uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class XmlParser {
public:
  explicit XmlParser(std::string_view s) : s_(s) {}

  TreeNode document() {
    skip_misc();
    if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected root element");
    TreeNode root = element();
    skip_misc();
    if (pos_ != s_.size()) fail("trailing content after root element");
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::invalid_argument, "xml parse error at " + std::to_string(pos_) + ": " + what);
  }

  bool starts(std::string_view p) const { return s_.compare(pos_, p.size(), p) == 0; }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void skip_misc() {
    while (true) {
      skip_space();
      if (starts("<?")) {
        auto end = s_.find("?>", pos_);
        if (end == std::string_view::npos) fail("unterminated declaration");
        pos_ = end + 2;
      } else if (starts("<!--")) {
        auto end = s_.find("-->", pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
      } else {
        return;
      }
    }
  }

  std::string name() {
    std::size_t start = pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '/' || c == '>' || c == '=' || c == '<') break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string decode(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") {
        out.push_back('&');
      } else if (ent == "lt") {
        out.push_back('<');
      } else if (ent == "gt") {
        out.push_back('>');
      } else if (ent == "quot") {
        out.push_back('"');
      } else if (ent == "apos") {
        out.push_back('\'');
      } else if (!ent.empty() && ent[0] == '#') {
        std::uint32_t cp = 0;
        bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
        std::string_view digits = ent.substr(hex ? 2 : 1);
        if (digits.empty()) fail("bad character reference");
        for (char d : digits) {
          int v = std::isdigit(static_cast<unsigned char>(d)) ? d - '0'
                  : hex && std::isxdigit(static_cast<unsigned char>(d)) ? std::tolower(d) - 'a' + 10
                                                                    : -1;
          if (v < 0) fail("bad character reference");
          cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
          if (cp > 0x10FFFF) fail("bad character reference");
        }
        append_utf8(cp, out);
      } else {
        fail("unknown entity &" + std::string(ent) + ";");
      }
      i = semi;
    }
    return out;
  }

  TreeNode element() {
    ++pos_;  // '<'
    TreeNode node(name());
    while (true) {
      skip_space();
      if (pos_ >= s_.size()) fail("unterminated start tag");
      if (starts("/>")) {
        pos_ += 2;
        return node;
      }
      if (s_[pos_] == '>') {
        ++pos_;
        break;
      }
      std::string key = name();
      skip_space();
      if (pos_ >= s_.size() || s_[pos_] != '=') fail("expected '='");
      ++pos_;
      skip_space();
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) fail("expected quoted attribute value");
      char q = s_[pos_++];
      std::size_t end = s_.find(q, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      std::string value = decode(s_.substr(pos_, end - pos_));
      pos_ = end + 1;
      if (!node.attributes.emplace(std::move(key), std::move(value)).second) fail("duplicate attribute");
    }
    std::string text;
    bool had_text = false;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated element <" + node.name + ">");
      if (starts("</")) {
        pos_ += 2;
        std::string closing = name();
        if (closing != node.name) fail("mismatched closing tag </" + closing + ">");
        skip_space();
        if (pos_ >= s_.size() || s_[pos_] != '>') fail("expected '>'");
        ++pos_;
        break;
      }
      if (starts("<!--")) {
        auto end = s_.find("-->", pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
        continue;
      }
      if (starts("<![CDATA[")) {
        auto end = s_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA");
        text += s_.substr(pos_ + 9, end - pos_ - 9);
        had_text = true;
        pos_ = end + 3;
        continue;
      }
      if (s_[pos_] == '<') {
        node.children.push_back(element());
        continue;
      }
      std::size_t end = s_.find('<', pos_);
      if (end == std::string_view::npos) end = s_.size();
      text += decode(s_.substr(pos_, end - pos_));
      had_text = true;
      pos_ = end;
    }
    bool blank = true;
    for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
    if (!node.children.empty()) {
      if (!blank) fail("mixed content in <" + node.name + ">");
    } else {
      node.text = had_text ? text : std::string();
    }
    return node;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

const TreeNode* TreeNode::child(std::string_view child_name) const {
  for (const auto& c : children) {
    if (c.name == child_name) return &c;
  }
  return nullptr;
}

std::optional<std::string> TreeNode::child_text(std::string_view child_name) const {
  const TreeNode* c = child(child_name);
  if (!c || !c->text) return std::nullopt;
  return c->text;
}

void check_well_formed(const TreeNode& node) {
  if (node.name.empty()) throw Error(ErrorCode::invalid_argument, "element with empty name");
  if (node.text && !node.children.empty()) {
    throw Error(ErrorCode::invalid_argument, "mixed content in <" + node.name + ">");
  }
  for (const auto& c : node.children) check_well_formed(c);
}

void append_canonical_xml(const TreeNode& node, std::string& out) {
  out.push_back('<');
  out += node.name;
  for (const auto& [k, v] : node.attributes) {
    out.push_back(' ');
    out += k;
    out += "=\"";
    escape_into(v, out, true);
    out.push_back('"');
  }
  if (!node.text && node.children.empty()) {
    out += "/>";
    return;
  }
  out.push_back('>');
  if (node.text) escape_into(*node.text, out, false);
  for (const auto& c : node.children) append_canonical_xml(c, out);
  out += "</";
  out += node.name;
  out.push_back('>');
}

std::string to_canonical_xml(const TreeNode& node) {
  std::string out;
  append_canonical_xml(node, out);
  return out;
}

TreeNode parse_xml(std::string_view text) { return XmlParser(text).document(); }

}  // namespace liststand
