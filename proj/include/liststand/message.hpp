#pragma once

#include "liststand/timestamp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace liststand {

/// One mbox record before cleaning.
struct RawMessage {
  std::string source_id;
  std::uint64_t offset = 0;  // byte offset of the record's "From " line
  std::string envelope;      // the "From " line itself, empty if absent
  std::vector<std::pair<std::string, std::string>> header_lines;
  std::string body_bytes;

  bool operator==(const RawMessage&) const = default;
};

/// Quality flags attached by normalize_message.
namespace flag {
inline constexpr const char* synthetic_id = "synthetic_id";
inline constexpr const char* date_from_envelope = "date_from_envelope";
inline constexpr const char* date_missing = "date_missing";
inline constexpr const char* unparseable_from = "unparseable_from";
}  // namespace flag

/// A cleaned email.
struct Message {
  std::string message_id;  // no angle brackets
  std::optional<std::string> in_reply_to;
  std::vector<std::string> references;
  std::optional<std::string> from_display;
  std::string from_address;  // "local@domain", lowercased
  Timestamp date{};
  std::string subject_raw;
  std::string subject_norm;
  std::string body_text;
  std::string source_id;
  std::uint64_t offset = 0;
  std::vector<std::string> flags;

  bool has_flag(std::string_view f) const {
    for (const auto& x : flags) {
      if (x == f) return true;
    }
    return false;
  }
  bool operator==(const Message&) const = default;
};

}  // namespace liststand
