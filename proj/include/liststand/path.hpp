#pragma once

#include "liststand/tree.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace liststand {

enum class Axis { child, descendant };
enum class Comparator { eq, ne, lt, le, gt, ge, contains };

const char* to_string(Comparator op);
Comparator parse_comparator(std::string_view s);

/// Existential-free comparison of two leaf values: numeric when both sides
/// are integers, lexicographic otherwise.
bool compare_values(std::string_view left, Comparator op, std::string_view right);

struct StepPredicate {
  bool on_attribute = false;  // [@name op lit] vs [name op lit]
  std::string name;
  Comparator op = Comparator::eq;
  std::string literal;
  bool quoted = true;  // printed back quoted
  bool operator==(const StepPredicate&) const = default;
};

struct PathStep {
  Axis axis = Axis::child;
  std::string name;  // "*" is the wildcard
  std::optional<StepPredicate> predicate;

  bool wildcard() const { return name == "*"; }
  bool operator==(const PathStep&) const = default;
};

struct PathExpr {
  std::vector<PathStep> steps;
  bool operator==(const PathExpr&) const = default;
};

/// Steps joined by "/" (child) or "//" (descendant), optional leading
/// separator, predicates "[@attr op literal]" or "[child op literal]".
/// Throws Error(invalid_argument) "path syntax error at N: ...".
PathExpr parse_path(std::string_view text);

/// Canonical printer; parse_path(to_string(p)) == p.
std::string to_string(const PathExpr& path);

bool step_matches(const PathStep& step, const TreeNode& node);

/// Nodes reached from `context` (steps start from its children),
/// duplicate-free in document order.
std::vector<const TreeNode*> evaluate_path(const PathExpr& path, const TreeNode& context);

/// Same, but `root` is treated as the single child of a document node, so
/// "message" selects the root itself when it is a <message>.
std::vector<const TreeNode*> evaluate_path_from_document(const PathExpr& path, const TreeNode& root);

}  // namespace liststand
