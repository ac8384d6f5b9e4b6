#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace liststand::mime {

using HeaderList = std::vector<std::pair<std::string, std::string>>;

struct ContentType {
  std::string type = "text";
  std::string subtype = "plain";
  std::map<std::string, std::string> params;  // keys lowercased

  bool is_text_plain() const { return type == "text" && subtype == "plain"; }
  bool is_multipart() const { return type == "multipart"; }
};

ContentType parse_content_type(std::string_view value);

std::string decode_base64(std::string_view in);
/// `header_mode` maps '_' to space as in RFC 2047 "Q" encoding.
std::string decode_quoted_printable(std::string_view in, bool header_mode = false);

/// Decodes RFC 2047 encoded words (=?charset?Q|B?...?=) and returns UTF-8.
std::string decode_header_value(std::string_view value);

/// Finds a header value by case-insensitive name, first occurrence.
const std::string* find_header(const HeaderList& headers, std::string_view name);

/// First text/plain part of a message (descending into nested multiparts),
/// transfer-decoded and converted to UTF-8. Falls back to the whole raw body.
std::string extract_body_text(const HeaderList& headers, std::string_view body);

}  // namespace liststand::mime
