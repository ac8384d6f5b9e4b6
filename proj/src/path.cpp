#include "liststand/path.hpp"

#include "liststand/error.hpp"
#include "liststand/text.hpp"

#include <cctype>
#include <charconv>
#include <unordered_set>

namespace liststand {
namespace {

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':';
}

class PathParser {
public:
  explicit PathParser(std::string_view s) : s_(s) {}

  PathExpr parse() {
    PathExpr path;
    skip_space();
    Axis axis = Axis::child;
    if (starts("//")) {
      axis = Axis::descendant;
      pos_ += 2;
    } else if (starts("/")) {
      ++pos_;
    }
    while (true) {
      skip_space();
      path.steps.push_back(step(axis));
      skip_space();
      if (pos_ == s_.size()) break;
      if (starts("//")) {
        axis = Axis::descendant;
        pos_ += 2;
      } else if (starts("/")) {
        axis = Axis::child;
        ++pos_;
      } else {
        fail("expected '/' or '//'");
      }
      skip_space();
      if (pos_ == s_.size()) fail("trailing axis without a step");
    }
    return path;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::invalid_argument, "path syntax error at " + std::to_string(pos_) + ": " + what);
  }
  bool starts(std::string_view p) const { return s_.compare(pos_, p.size(), p) == 0; }
  void skip_space() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }

  std::string name() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  PathStep step(Axis axis) {
    PathStep st;
    st.axis = axis;
    if (starts("*")) {
      ++pos_;
      st.name = "*";
    } else {
      if (pos_ >= s_.size()) fail("expected a step");
      st.name = name();
    }
    skip_space();
    if (starts("[")) {
      ++pos_;
      st.predicate = predicate();
    }
    return st;
  }

  Comparator comparator() {
    struct Op { std::string_view text; Comparator op; };
    static constexpr Op ops[] = {{"!=", Comparator::ne}, {"\xE2\x89\xA0", Comparator::ne},
                                 {"<=", Comparator::le}, {"\xE2\x89\xA4", Comparator::le},
                                 {">=", Comparator::ge}, {"\xE2\x89\xA5", Comparator::ge},
                                 {"=", Comparator::eq},  {"<", Comparator::lt},
                                 {">", Comparator::gt},  {"contains", Comparator::contains}};
    for (const auto& o : ops) {
      if (starts(o.text)) {
        pos_ += o.text.size();
        return o.op;
      }
    }
    fail("expected a comparison operator");
  }

  StepPredicate predicate() {
    StepPredicate p;
    skip_space();
    if (starts("@")) {
      ++pos_;
      p.on_attribute = true;
    }
    p.name = name();
    skip_space();
    p.op = comparator();
    skip_space();
    if (starts("'") || starts("\"")) {
      char q = s_[pos_++];
      std::size_t end = s_.find(q, pos_);
      if (end == std::string_view::npos) fail("unterminated string literal");
      p.literal = std::string(s_.substr(pos_, end - pos_));
      pos_ = end + 1;
    } else {
      std::size_t start = pos_;
      if (starts("-")) ++pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      if (pos_ == start || (pos_ == start + 1 && s_[start] == '-')) fail("expected a literal");
      p.literal = std::string(s_.substr(start, pos_ - start));
      p.quoted = false;
    }
    skip_space();
    if (!starts("]")) fail("expected ']'");
    ++pos_;
    return p;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool predicate_holds(const StepPredicate& p, const TreeNode& node) {
  if (p.on_attribute) {
    auto it = node.attributes.find(p.name);
    return it != node.attributes.end() && compare_values(it->second, p.op, p.literal);
  }
  for (const auto& c : node.children) {
    if (c.name == p.name && compare_values(c.text.value_or(""), p.op, p.literal)) return true;
  }
  return false;
}

void collect_descendants(const TreeNode& node, const PathStep& step, std::vector<const TreeNode*>& out) {
  for (const auto& c : node.children) {
    if (step_matches(step, c)) out.push_back(&c);
    collect_descendants(c, step, out);
  }
}

std::vector<const TreeNode*> apply_steps(const PathExpr& path, std::size_t first_step,
                                         std::vector<const TreeNode*> current) {
  for (std::size_t i = first_step; i < path.steps.size(); ++i) {
    const PathStep& step = path.steps[i];
    std::vector<const TreeNode*> next;
    std::unordered_set<const TreeNode*> seen;
    for (const TreeNode* n : current) {
      std::vector<const TreeNode*> found;
      if (step.axis == Axis::child) {
        for (const auto& c : n->children) {
          if (step_matches(step, c)) found.push_back(&c);
        }
      } else {
        collect_descendants(*n, step, found);
      }
      for (const TreeNode* f : found) {
        if (seen.insert(f).second) next.push_back(f);
      }
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace

const char* to_string(Comparator op) {
  switch (op) {
    case Comparator::eq: return "=";
    case Comparator::ne: return "!=";
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::gt: return ">";
    case Comparator::ge: return ">=";
    case Comparator::contains: return "contains";
  }
  return "=";
}

Comparator parse_comparator(std::string_view s) {
  if (s == "=" || s == "==") return Comparator::eq;
  if (s == "!=" || s == "\xE2\x89\xA0") return Comparator::ne;
  if (s == "<") return Comparator::lt;
  if (s == "<=" || s == "\xE2\x89\xA4") return Comparator::le;
  if (s == ">") return Comparator::gt;
  if (s == ">=" || s == "\xE2\x89\xA5") return Comparator::ge;
  if (s == "contains") return Comparator::contains;
  throw Error(ErrorCode::invalid_argument, "unknown comparator: " + std::string(s));
}

bool compare_values(std::string_view left, Comparator op, std::string_view right) {
  if (op == Comparator::contains) return left.find(right) != std::string_view::npos;
  int cmp = 0;
  if (text::is_integer(left) && text::is_integer(right)) {
    long long a = 0, b = 0;
    std::from_chars(left.data() + (left[0] == '+'), left.data() + left.size(), a);
    std::from_chars(right.data() + (right[0] == '+'), right.data() + right.size(), b);
    cmp = a < b ? -1 : a > b ? 1 : 0;
  } else {
    int c = left.compare(right);
    cmp = c < 0 ? -1 : c > 0 ? 1 : 0;
  }
  switch (op) {
    case Comparator::eq: return cmp == 0;
    case Comparator::ne: return cmp != 0;
    case Comparator::lt: return cmp < 0;
    case Comparator::le: return cmp <= 0;
    case Comparator::gt: return cmp > 0;
    case Comparator::ge: return cmp >= 0;
    case Comparator::contains: break;
  }
  return false;
}

PathExpr parse_path(std::string_view text) { return PathParser(text).parse(); }

std::string to_string(const PathExpr& path) {
  std::string out;
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const PathStep& st = path.steps[i];
    if (st.axis == Axis::descendant) {
      out += "//";
    } else if (i > 0) {
      out += "/";
    }
    out += st.name;
    if (st.predicate) {
      const StepPredicate& p = *st.predicate;
      out += "[";
      if (p.on_attribute) out += "@";
      out += p.name;
      out += p.op == Comparator::contains ? " contains " : to_string(p.op);
      if (p.quoted) {
        char q = p.literal.find('\'') == std::string::npos ? '\'' : '"';
        out += q + p.literal + q;
      } else {
        out += p.literal;
      }
      out += "]";
    }
  }
  return out;
}

bool step_matches(const PathStep& step, const TreeNode& node) {
  if (!step.wildcard() && node.name != step.name) return false;
  return !step.predicate || predicate_holds(*step.predicate, node);
}

std::vector<const TreeNode*> evaluate_path(const PathExpr& path, const TreeNode& context) {
  return apply_steps(path, 0, {&context});
}

std::vector<const TreeNode*> evaluate_path_from_document(const PathExpr& path, const TreeNode& root) {
  if (path.steps.empty()) return {};
  const PathStep& first = path.steps.front();
  std::vector<const TreeNode*> start;
  if (step_matches(first, root)) start.push_back(&root);
  if (first.axis == Axis::descendant) collect_descendants(root, first, start);
  return apply_steps(path, 1, std::move(start));
}

}  // namespace liststand
