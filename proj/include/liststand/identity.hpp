#pragma once

#include "liststand/message.hpp"

#include <map>
#include <tuple>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace liststand {

using EntityId = std::int64_t;

struct Address {
  std::string local;   // lowercased, "+tag" stripped
  std::string domain;  // lowercased, no trailing dot
  std::optional<std::string> display_norm;

  std::string to_string() const { return local + "@" + domain; }
  auto operator<=>(const Address& o) const { return std::tie(local, domain) <=> std::tie(o.local, o.domain); }
  bool operator==(const Address& o) const { return local == o.local && domain == o.domain; }
};

/// Parses `"Display" <local@domain> (comment)` and friends.
/// Throws Error(invalid_argument, "unparseable address") when no '@' exists.
Address normalize_address(std::string_view raw, bool strip_plus_tag = true);

/// Display name as written (quotes and surrounding whitespace removed), or
/// the comment text for the legacy `addr (Name)` form. Empty if none.
std::string extract_display_name(std::string_view raw);

/// Lowercase, punctuation to spaces, whitespace collapsed; nullopt if empty.
std::optional<std::string> normalize_display(std::string_view display);

/// The mail domain verbatim; no registrable-suffix collapsing.
std::string extract_domain(const Address& addr);

struct InstitutionRule {
  std::string pattern;  // "ibm.com" or "*.ibm.com"
  std::string institution;
};

struct InstitutionMap {
  std::vector<InstitutionRule> rules;

  /// CSV `pattern,institution`, '#' comments and blank lines ignored.
  static InstitutionMap parse_csv(std::string_view csv);
  static InstitutionMap load(const std::string& path);
};

/// First matching rule wins; "*.x" matches strict subdomains of x only.
/// Unmatched domains map to themselves.
std::string map_institution(std::string_view domain, const InstitutionMap& map);

struct MergeEvidence {
  std::string rule;  // "R2", "R3"
  std::string a;     // address strings
  std::string b;
  bool operator==(const MergeEvidence&) const = default;
};

struct Entity {
  EntityId entity_id = 0;
  std::vector<Address> addresses;  // sorted
  std::optional<std::string> canonical_name;
  std::vector<MergeEvidence> evidence;

  /// Stable textual key: the smallest address.
  std::string key() const { return addresses.front().to_string(); }
  bool operator==(const Entity&) const = default;
};

struct ResolveConfig {
  bool r1 = true;   // identical (local, domain); always implied by seeding
  bool r2 = true;   // shared display name, >= 2 tokens and >= 7 characters
  bool r3 = false;  // shared local part (>= 5 chars) within one institution
  InstitutionMap institutions;

  static ResolveConfig from_rule_list(std::string_view rules);
};

class EntityCatalog {
public:
  EntityCatalog() = default;
  explicit EntityCatalog(std::vector<Entity> entities);

  const std::vector<Entity>& entities() const { return entities_; }
  std::size_t size() const { return entities_.size(); }

  const Entity* find(EntityId id) const;
  std::optional<EntityId> entity_of_address(std::string_view address) const;
  /// Throws Error(not_found) naming the address.
  EntityId entity_of(const Message& m) const;

  bool operator==(const EntityCatalog& o) const;

private:
  std::vector<Entity> entities_;
  std::map<std::string, EntityId, std::less<>> by_address_;
};

EntityCatalog resolve_entities(const std::vector<Message>& messages, const ResolveConfig& config = {});

}  // namespace liststand
