#include "liststand/ingest.hpp"

#include "liststand/error.hpp"
#include "liststand/identity.hpp"
#include "liststand/mime.hpp"
#include "liststand/text.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace liststand {
namespace {

namespace fs = std::filesystem;

bool valid_header_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u > 32 && u < 127 && c != ':';
  });
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool is_from_line(std::string_view s, std::size_t at) { return s.compare(at, 5, "From ") == 0; }

// ^>+From  loses one '>' (mboxrd)
std::string unescape_from_lines(std::string_view body) {
  if (body.find(">From ") == std::string_view::npos) return std::string(body);
  std::string out;
  out.reserve(body.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t eol = body.find('\n', pos);
    std::size_t end = eol == std::string_view::npos ? body.size() : eol + 1;
    std::string_view line = body.substr(pos, end - pos);
    std::size_t gt = line.find_first_not_of('>');
    if (gt != std::string_view::npos && gt > 0 && is_from_line(line, gt)) line.remove_prefix(1);
    out += line;
    pos = end;
  }
  return out;
}

std::string escape_from_lines(std::string_view body) {
  std::string out;
  out.reserve(body.size() + 16);
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t eol = body.find('\n', pos);
    std::size_t end = eol == std::string_view::npos ? body.size() : eol + 1;
    std::string_view line = body.substr(pos, end - pos);
    std::size_t gt = line.find_first_not_of('>');
    if (gt != std::string_view::npos && is_from_line(line, gt)) out.push_back('>');
    out += line;
    pos = end;
  }
  return out;
}

// Splits record content into headers and body. Returns false when the record
// is malformed (no headers, or no blank line closing the header block).
bool split_headers(std::string_view content, RawMessage& out) {
  std::size_t pos = 0;
  bool first = true;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) break;  // header block never closed
    std::string_view line = strip_cr(content.substr(pos, eol - pos));
    std::size_t next = eol + 1;
    if (line.empty()) {
      out.body_bytes = unescape_from_lines(content.substr(next));
      return !first;
    }
    if (line[0] == ' ' || line[0] == '\t') {
      if (first) break;
      std::string& value = out.header_lines.back().second;
      while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
      value.push_back(' ');
      value += text::trim(line);
    } else {
      std::size_t colon = line.find(':');
      if (colon == std::string_view::npos || !valid_header_name(line.substr(0, colon))) break;
      std::string value(text::trim(line.substr(colon + 1)));
      out.header_lines.emplace_back(std::string(line.substr(0, colon)), std::move(value));
    }
    first = false;
    pos = next;
  }
  out.header_lines.clear();
  out.body_bytes = unescape_from_lines(content);
  return false;
}

std::string sha1_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr);
  return text::hex_encode(std::string_view(reinterpret_cast<const char*>(digest), len));
}

std::vector<std::string> angle_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = s.find('<', pos);
    if (open == std::string_view::npos) break;
    std::size_t close = s.find('>', open + 1);
    if (close == std::string_view::npos) break;
    std::string token;
    for (char c : s.substr(open + 1, close - open - 1)) {
      if (!std::isspace(static_cast<unsigned char>(c))) token.push_back(c);
    }
    if (!token.empty()) out.push_back(std::move(token));
    pos = close + 1;
  }
  return out;
}

std::string strip_brackets(std::string_view s) {
  s = text::trim(s);
  if (!s.empty() && s.front() == '<') s.remove_prefix(1);
  if (!s.empty() && s.back() == '>') s.remove_suffix(1);
  return std::string(text::trim(s));
}

// Strips one leading reply prefix or list tag; returns false if none matched.
bool strip_one_prefix(std::string_view& s, const NormalizeOptions& options) {
  for (std::string_view p : {"re:", "fwd:", "fw:"}) {
    if (text::istarts_with(s, p)) {
      s = text::trim(s.substr(p.size()));
      return true;
    }
  }
  if (!s.empty() && s.front() == '[') {
    std::size_t close = s.find(']');
    if (close == std::string_view::npos) return false;
    std::string_view tag = s.substr(0, close + 1);
    bool strip = false;
    if (options.list_tags.empty()) {
      strip = tag.size() - 2 <= options.max_tag_length;
    } else {
      for (const auto& t : options.list_tags) {
        std::string_view want = t;
        if (text::iequals(want, tag) || (want.size() + 2 == tag.size() && text::iequals(want, tag.substr(1, tag.size() - 2)))) {
          strip = true;
        }
      }
    }
    if (strip) {
      s = text::trim(s.substr(close + 1));
      return true;
    }
  }
  return false;
}

struct Unit {
  std::string source_id;
  std::string location;
  bool is_url = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

}  // namespace

MboxReader::MboxReader(std::string_view bytes, std::string source_id,
                       std::vector<IngestWarning>* warnings)
    : bytes_(bytes), source_id_(std::move(source_id)), warnings_(warnings) {}

bool MboxReader::next(RawMessage& out) {
  if (pos_ >= bytes_.size()) return false;
  out = RawMessage{};
  out.source_id = source_id_;
  out.offset = pos_;
  std::size_t content_start = pos_;
  if (is_from_line(bytes_, pos_)) {
    std::size_t eol = bytes_.find('\n', pos_);
    std::size_t line_end = eol == std::string_view::npos ? bytes_.size() : eol;
    out.envelope = std::string(strip_cr(bytes_.substr(pos_, line_end - pos_)));
    content_start = eol == std::string_view::npos ? bytes_.size() : eol + 1;
  }
  // Next boundary: "From " at line start, preceded by a blank line.
  std::size_t boundary = bytes_.size();
  std::size_t search = content_start > 0 ? content_start - 1 : 0;
  while (true) {
    std::size_t nl = bytes_.find("\nFrom ", search);
    if (nl == std::string_view::npos) break;
    if (nl >= content_start) {
      bool blank_before = nl == 0 || bytes_[nl - 1] == '\n' ||
                          (bytes_[nl - 1] == '\r' && (nl == 1 || bytes_[nl - 2] == '\n'));
      if (blank_before) {
        boundary = nl + 1;
        break;
      }
    }
    search = nl + 1;
  }
  std::string_view content = bytes_.substr(content_start, boundary - content_start);
  // the blank separator line belongs to the boundary, not the body
  if (boundary < bytes_.size()) {
    if (content.size() >= 2 && content.substr(content.size() - 2) == "\n\n") {
      content.remove_suffix(1);
    } else if (content.size() >= 4 && content.substr(content.size() - 4) == "\r\n\r\n") {
      content.remove_suffix(2);
    }
  }
  pos_ = boundary;
  if (!split_headers(content, out) && warnings_) {
    warnings_->push_back({source_id_, out.offset, "malformed record: no header block"});
  }
  return true;
}

std::vector<RawMessage> parse_mbox(std::string_view bytes, std::string_view source_id,
                                   std::vector<IngestWarning>* warnings) {
  std::vector<RawMessage> out;
  MboxReader reader(bytes, std::string(source_id), warnings);
  RawMessage rec;
  while (reader.next(rec)) out.push_back(std::move(rec));
  return out;
}

std::string serialize_mbox(const std::vector<RawMessage>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.envelope.empty() ? std::string("From MAILER-DAEMON Thu Jan  1 00:00:00 1970") : r.envelope;
    out.push_back('\n');
    for (const auto& [name, value] : r.header_lines) {
      out += name;
      out += ": ";
      out += value;
      out.push_back('\n');
    }
    out.push_back('\n');
    out += escape_from_lines(r.body_bytes);
    if (!r.body_bytes.empty() && r.body_bytes.back() != '\n') out.push_back('\n');
    out.push_back('\n');
  }
  return out;
}

std::string normalize_subject(std::string_view subject, const NormalizeOptions& options) {
  std::string collapsed = text::to_lower(text::collapse_whitespace(subject));
  std::string_view s = collapsed;
  while (strip_one_prefix(s, options)) {
  }
  return std::string(s);
}

Message normalize_message(const RawMessage& raw, const NormalizeOptions& options) {
  Message m;
  m.source_id = raw.source_id;
  m.offset = raw.offset;
  const auto& headers = raw.header_lines;

  const std::string* mid = mime::find_header(headers, "Message-ID");
  if (mid) {
    auto toks = angle_tokens(*mid);
    m.message_id = toks.empty() ? strip_brackets(*mid) : toks.front();
  }
  if (m.message_id.empty()) {
    std::string material;
    for (const auto& [k, v] : headers) {
      material += k;
      material += ": ";
      material += v;
      material.push_back('\n');
    }
    material.push_back('\n');
    material += raw.body_bytes;
    m.message_id = "sha1:" + sha1_hex(material) + "@synthetic";
    m.flags.emplace_back(flag::synthetic_id);
  }

  if (const std::string* irt = mime::find_header(headers, "In-Reply-To")) {
    auto toks = angle_tokens(*irt);
    if (!toks.empty()) m.in_reply_to = toks.front();
  }
  if (const std::string* refs = mime::find_header(headers, "References")) {
    m.references = angle_tokens(*refs);
  }

  if (const std::string* from = mime::find_header(headers, "From")) {
    std::string decoded = mime::decode_header_value(*from);
    try {
      Address addr = normalize_address(decoded, options.strip_plus_tag);
      m.from_address = addr.to_string();
      std::string display = extract_display_name(decoded);
      if (!display.empty()) m.from_display = display;
    } catch (const Error&) {
      m.flags.emplace_back(flag::unparseable_from);
    }
  } else {
    m.flags.emplace_back(flag::unparseable_from);
  }
  if (m.from_address.empty()) m.from_address = "unknown@unknown.invalid";

  std::optional<Timestamp> date;
  if (const std::string* d = mime::find_header(headers, "Date")) date = parse_rfc2822_date(*d);
  if (!date && !raw.envelope.empty()) {
    date = parse_envelope_date(raw.envelope);
    if (date) m.flags.emplace_back(flag::date_from_envelope);
  }
  if (!date) {
    date = Timestamp{};
    m.flags.emplace_back(flag::date_missing);
  }
  m.date = *date;

  if (const std::string* subj = mime::find_header(headers, "Subject")) {
    m.subject_raw = text::collapse_whitespace(mime::decode_header_value(*subj));
  }
  m.subject_norm = normalize_subject(m.subject_raw, options);
  m.body_text = mime::extract_body_text(headers, raw.body_bytes);
  return m;
}

DedupeResult dedupe(std::vector<Message> messages) {
  std::unordered_map<std::string_view, std::size_t> best;
  best.reserve(messages.size());
  for (std::size_t i = 0; i < messages.size(); ++i) {
    auto [it, inserted] = best.try_emplace(messages[i].message_id, i);
    if (!inserted) {
      const Message& cur = messages[it->second];
      if (std::tie(messages[i].source_id, messages[i].offset) < std::tie(cur.source_id, cur.offset)) {
        it->second = i;
      }
    }
  }
  DedupeResult result;
  result.duplicates = messages.size() - best.size();
  std::vector<bool> keep(messages.size(), false);
  for (const auto& [id, idx] : best) keep[idx] = true;
  best.clear();
  result.messages.reserve(messages.size() - result.duplicates);
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (keep[i]) result.messages.push_back(std::move(messages[i]));
  }
  return result;
}

SourceKind parse_source_kind(std::string_view name) {
  if (name == "mbox_file") return SourceKind::mbox_file;
  if (name == "archive_dir") return SourceKind::archive_dir;
  if (name == "url_list") return SourceKind::url_list;
  throw Error(ErrorCode::invalid_argument, "unknown source kind: " + std::string(name));
}

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::mbox_file: return "mbox_file";
    case SourceKind::archive_dir: return "archive_dir";
    case SourceKind::url_list: return "url_list";
  }
  return "mbox_file";
}

std::string fetch_url(const std::string& url) {
  if (text::starts_with(url, "file://")) return read_file(url.substr(7));
  if (!text::starts_with(url, "http://") && !text::starts_with(url, "https://")) return read_file(url);
  std::size_t scheme_end = url.find("://") + 3;
  std::size_t path_at = url.find('/', scheme_end);
  std::string origin = url.substr(0, path_at);
  std::string path = path_at == std::string::npos ? "/" : url.substr(path_at);
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  auto res = client.Get(path);
  if (!res) throw Error(ErrorCode::io, "cannot fetch " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error(ErrorCode::io, "HTTP " + std::to_string(res->status) + " for " + url);
  return res->body;
}

LoadResult load_sources(const std::vector<MailboxSource>& sources, const LoadOptions& options) {
  LoadResult result;
  std::vector<Unit> units;
  for (const auto& src : sources) {
    std::string id = src.source_id.empty() ? src.uri : src.source_id;
    try {
      if (src.uri.empty()) throw Error(ErrorCode::invalid_argument, "empty source uri");
      switch (src.kind) {
        case SourceKind::mbox_file:
          units.push_back({id, src.uri, false});
          break;
        case SourceKind::archive_dir: {
          if (!fs::is_directory(src.uri)) throw Error(ErrorCode::io, "not a directory: " + src.uri);
          std::vector<fs::path> files;
          for (const auto& entry : fs::recursive_directory_iterator(src.uri)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
          }
          std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
            return a.generic_string() < b.generic_string();
          });
          for (const auto& f : files) units.push_back({f.generic_string(), f.string(), false});
          break;
        }
        case SourceKind::url_list: {
          std::istringstream lines(read_file(src.uri));
          std::string line;
          while (std::getline(lines, line)) {
            std::string url(text::trim(line));
            if (url.empty() || url[0] == '#') continue;
            units.push_back({url, url, true});
          }
          break;
        }
      }
    } catch (const std::exception& e) {
      result.errors.push_back({id, e.what()});
    }
  }

  struct UnitOutput {
    std::vector<Message> messages;
    std::vector<IngestWarning> warnings;
    std::optional<std::string> error;
    std::size_t duplicates = 0;
  };
  std::vector<UnitOutput> outputs(units.size());
  auto fetch = options.fetch ? options.fetch : fetch_url;

  auto process = [&](std::size_t i) {
    UnitOutput& out = outputs[i];
    try {
      std::string bytes = units[i].is_url ? fetch(units[i].location) : read_file(units[i].location);
      MboxReader reader(bytes, units[i].source_id, &out.warnings);
      RawMessage raw;
      while (reader.next(raw)) out.messages.push_back(normalize_message(raw, options.normalize));
      auto d = dedupe(std::move(out.messages));
      out.messages = std::move(d.messages);
      out.duplicates = d.duplicates;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  };

  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(units.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < units.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < units.size(); i = next++) process(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<Message> all;
  for (std::size_t i = 0; i < units.size(); ++i) {
    auto& out = outputs[i];
    if (out.error) result.errors.push_back({units[i].source_id, *out.error});
    result.duplicates += out.duplicates;
    std::move(out.warnings.begin(), out.warnings.end(), std::back_inserter(result.warnings));
    std::move(out.messages.begin(), out.messages.end(), std::back_inserter(all));
    out.messages = {};
  }
  auto merged = dedupe(std::move(all));
  result.duplicates += merged.duplicates;
  result.messages = std::move(merged.messages);
  return result;
}

}  // namespace liststand
