#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace liststand {

/// An element with attributes and either text content or element children.
/// Mixed content is not representable by the warehouse.
struct TreeNode {
  std::string name;
  std::map<std::string, std::string> attributes;
  std::optional<std::string> text;
  std::vector<TreeNode> children;

  TreeNode() = default;
  explicit TreeNode(std::string n) : name(std::move(n)) {}

  static TreeNode leaf(std::string name, std::string value) {
    TreeNode n(std::move(name));
    n.text = std::move(value);
    return n;
  }

  TreeNode& add(TreeNode child) {
    children.push_back(std::move(child));
    return children.back();
  }
  TreeNode& set(std::string key, std::string value) {
    attributes[std::move(key)] = std::move(value);
    return *this;
  }

  const TreeNode* child(std::string_view child_name) const;
  /// Text of the first child with that name, if any.
  std::optional<std::string> child_text(std::string_view child_name) const;

  bool operator==(const TreeNode&) const = default;
};

/// Throws Error(invalid_argument) on an empty name or mixed content.
void check_well_formed(const TreeNode& node);

/// Single-line canonical form: attributes sorted by key, no insignificant
/// whitespace, `<a/>` for no content, `<a></a>` for empty text, control
/// characters escaped as character references.
std::string to_canonical_xml(const TreeNode& node);
void append_canonical_xml(const TreeNode& node, std::string& out);

/// Parses one element (and nothing else but whitespace, comments, an XML
/// declaration). Whitespace-only text next to child elements is dropped.
/// Throws Error(invalid_argument) with the byte position on malformed input.
TreeNode parse_xml(std::string_view text);

}  // namespace liststand
