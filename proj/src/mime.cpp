#include "liststand/mime.hpp"

#include "liststand/text.hpp"

#include <array>
#include <cctype>
#include <optional>

namespace liststand::mime {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string decode_charset(std::string_view bytes, std::string_view charset) {
  std::string cs = text::to_lower(charset);
  bool latin = cs == "iso-8859-1" || cs == "latin1" || cs == "iso-8859-15" ||
               cs == "windows-1252" || cs == "cp1252";
  if (latin && !text::is_valid_utf8(bytes)) return text::latin1_to_utf8(bytes);
  return text::to_utf8(bytes);
}

// Parses one encoded word starting at `pos`; on success advances pos.
std::optional<std::string> encoded_word(std::string_view s, std::size_t& pos) {
  if (s.compare(pos, 2, "=?") != 0) return std::nullopt;
  std::size_t q1 = s.find('?', pos + 2);
  if (q1 == std::string_view::npos || q1 + 2 >= s.size() || s[q1 + 2] != '?') return std::nullopt;
  char enc = static_cast<char>(std::toupper(static_cast<unsigned char>(s[q1 + 1])));
  if (enc != 'Q' && enc != 'B') return std::nullopt;
  std::size_t end = s.find("?=", q1 + 3);
  if (end == std::string_view::npos) return std::nullopt;
  std::string_view charset = s.substr(pos + 2, q1 - pos - 2);
  if (auto star = charset.find('*'); star != std::string_view::npos) charset = charset.substr(0, star);
  std::string_view payload = s.substr(q1 + 3, end - q1 - 3);
  std::string bytes = enc == 'B' ? decode_base64(payload) : decode_quoted_printable(payload, true);
  pos = end + 2;
  return decode_charset(bytes, charset);
}

std::string transfer_decode(const HeaderList& headers, std::string_view body) {
  const std::string* cte = find_header(headers, "Content-Transfer-Encoding");
  std::string enc = cte ? text::to_lower(text::trim(*cte)) : std::string();
  if (enc == "base64") return decode_base64(body);
  if (enc == "quoted-printable") return decode_quoted_printable(body);
  return std::string(body);
}

struct Part {
  HeaderList headers;
  std::string_view body;
};

Part split_part(std::string_view raw) {
  Part part;
  std::size_t pos = 0;
  // A part beginning with a blank line has no headers.
  while (pos < raw.size()) {
    std::size_t eol = raw.find('\n', pos);
    std::string_view line = raw.substr(pos, eol == std::string_view::npos ? raw.size() - pos : eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t next = eol == std::string_view::npos ? raw.size() : eol + 1;
    if (line.empty()) {
      pos = next;
      part.body = raw.substr(pos);
      return part;
    }
    if ((line[0] == ' ' || line[0] == '\t') && !part.headers.empty()) {
      part.headers.back().second += ' ';
      part.headers.back().second += text::trim(line);
    } else if (auto colon = line.find(':'); colon != std::string_view::npos && colon > 0) {
      part.headers.emplace_back(std::string(text::trim(line.substr(0, colon))),
                                std::string(text::trim(line.substr(colon + 1))));
    } else {
      break;
    }
    pos = next;
  }
  part.body = raw.substr(pos);
  return part;
}

std::vector<std::string_view> split_multipart(std::string_view body, std::string_view boundary) {
  std::vector<std::string_view> parts;
  std::string delim = "--" + std::string(boundary);
  std::size_t pos = 0;
  std::optional<std::size_t> part_start;
  while (pos <= body.size()) {
    std::size_t eol = body.find('\n', pos);
    std::size_t line_end = eol == std::string_view::npos ? body.size() : eol;
    std::string_view line = body.substr(pos, line_end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::starts_with(line, delim)) {
      if (part_start) {
        std::size_t end = pos;
        // the line break before the delimiter belongs to the delimiter
        if (end > *part_start && body[end - 1] == '\n') --end;
        if (end > *part_start && body[end - 1] == '\r') --end;
        parts.push_back(body.substr(*part_start, end - *part_start));
      }
      if (line.substr(delim.size(), 2) == "--") return parts;
      part_start = eol == std::string_view::npos ? body.size() : eol + 1;
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  if (part_start && *part_start < body.size()) parts.push_back(body.substr(*part_start));
  return parts;
}

std::optional<std::string> first_plain_text(const HeaderList& headers, std::string_view body, int depth) {
  if (depth > 8) return std::nullopt;
  const std::string* ct_header = find_header(headers, "Content-Type");
  ContentType ct = ct_header ? parse_content_type(*ct_header) : ContentType{};
  if (ct.is_multipart()) {
    auto b = ct.params.find("boundary");
    if (b == ct.params.end() || b->second.empty()) return std::nullopt;
    for (std::string_view raw_part : split_multipart(body, b->second)) {
      Part part = split_part(raw_part);
      if (auto found = first_plain_text(part.headers, part.body, depth + 1)) return found;
    }
    return std::nullopt;
  }
  if (!ct.is_text_plain()) return std::nullopt;
  auto cs = ct.params.find("charset");
  return decode_charset(transfer_decode(headers, body), cs == ct.params.end() ? "" : cs->second);
}

}  // namespace

ContentType parse_content_type(std::string_view value) {
  ContentType ct;
  auto fields = text::split(value, ';');
  std::string_view main = text::trim(fields[0]);
  if (auto slash = main.find('/'); slash != std::string_view::npos) {
    ct.type = text::to_lower(text::trim(main.substr(0, slash)));
    ct.subtype = text::to_lower(text::trim(main.substr(slash + 1)));
  }
  for (std::size_t i = 1; i < fields.size(); ++i) {
    std::string_view f = text::trim(fields[i]);
    auto eq = f.find('=');
    if (eq == std::string_view::npos) continue;
    std::string key = text::to_lower(text::trim(f.substr(0, eq)));
    std::string_view v = text::trim(f.substr(eq + 1));
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    ct.params[key] = std::string(v);
  }
  return ct;
}

std::string decode_base64(std::string_view in) {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(alphabet[i])] = i;
    return t;
  }();
  std::string out;
  out.reserve(in.size() * 3 / 4);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char ch : in) {
    if (ch == '=') break;
    int v = table[static_cast<unsigned char>(ch)];
    if (v < 0) continue;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

std::string decode_quoted_printable(std::string_view in, bool header_mode) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    char c = in[i];
    if (c == '_' && header_mode) {
      out.push_back(' ');
    } else if (c == '=' && i + 1 < in.size()) {
      if (in[i + 1] == '\n') {
        ++i;  // soft line break
      } else if (in[i + 1] == '\r' && i + 2 < in.size() && in[i + 2] == '\n') {
        i += 2;
      } else if (i + 2 < in.size() && hex_value(in[i + 1]) >= 0 && hex_value(in[i + 2]) >= 0) {
        out.push_back(static_cast<char>(hex_value(in[i + 1]) * 16 + hex_value(in[i + 2])));
        i += 2;
      } else {
        out.push_back(c);
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string decode_header_value(std::string_view value) {
  std::string out;
  std::string raw;  // undecoded run, charset-converted as a unit
  std::string pending_space;
  bool last_was_word = false;
  std::size_t pos = 0;
  while (pos < value.size()) {
    std::size_t at = pos;
    if (auto word = encoded_word(value, at)) {
      // whitespace between adjacent encoded words is dropped
      if (!last_was_word) raw += pending_space;
      pending_space.clear();
      out += text::to_utf8(raw);
      raw.clear();
      out += *word;
      pos = at;
      last_was_word = true;
      continue;
    }
    char c = value[pos];
    if (c == ' ' || c == '\t') {
      pending_space.push_back(c);
    } else {
      raw += pending_space;
      pending_space.clear();
      raw.push_back(c);
      last_was_word = false;
    }
    ++pos;
  }
  raw += pending_space;
  out += text::to_utf8(raw);
  return out;
}

const std::string* find_header(const HeaderList& headers, std::string_view name) {
  for (const auto& [k, v] : headers) {
    if (text::iequals(k, name)) return &v;
  }
  return nullptr;
}

std::string extract_body_text(const HeaderList& headers, std::string_view body) {
  if (auto plain = first_plain_text(headers, body, 0)) return *plain;
  return text::to_utf8(body);
}

}  // namespace liststand::mime
