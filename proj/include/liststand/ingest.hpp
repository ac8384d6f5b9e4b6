#pragma once

#include "liststand/message.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace liststand {

struct IngestWarning {
  std::string source_id;
  std::uint64_t offset = 0;
  std::string message;
};

/// Streams RawMessages out of an mbox buffer without copying the whole file.
/// Boundaries are "From " lines at the start of the buffer or after a blank
/// line (mboxrd); ">From " quoting is undone on read.
class MboxReader {
public:
  MboxReader(std::string_view bytes, std::string source_id,
             std::vector<IngestWarning>* warnings = nullptr);

  /// False once the buffer is exhausted.
  bool next(RawMessage& out);

private:
  std::string_view bytes_;
  std::string source_id_;
  std::vector<IngestWarning>* warnings_;
  std::size_t pos_ = 0;
};

std::vector<RawMessage> parse_mbox(std::string_view bytes, std::string_view source_id,
                                   std::vector<IngestWarning>* warnings = nullptr);

/// Writes records back in mboxrd form; parse_mbox(serialize_mbox(x)) == x
/// up to trailing blank lines in bodies.
std::string serialize_mbox(const std::vector<RawMessage>& records);

struct NormalizeOptions {
  /// Case-insensitive list tags such as "[xquery]". Empty means: strip any
  /// leading bracketed token up to max_tag_length characters.
  std::vector<std::string> list_tags;
  std::size_t max_tag_length = 30;
  bool strip_plus_tag = true;
};

std::string normalize_subject(std::string_view subject, const NormalizeOptions& options = {});

/// Never throws; problems are recorded in Message::flags.
Message normalize_message(const RawMessage& raw, const NormalizeOptions& options = {});

struct DedupeResult {
  std::vector<Message> messages;
  std::size_t duplicates = 0;
};

/// One survivor per message_id: the smallest (source_id, offset). Survivors
/// keep their input order.
DedupeResult dedupe(std::vector<Message> messages);

enum class SourceKind { mbox_file, archive_dir, url_list };

struct MailboxSource {
  std::string source_id;
  SourceKind kind = SourceKind::mbox_file;
  std::string uri;
};

SourceKind parse_source_kind(std::string_view name);
const char* to_string(SourceKind kind);

struct SourceError {
  std::string source_id;
  std::string message;
};

struct LoadResult {
  std::vector<Message> messages;
  std::vector<SourceError> errors;
  std::vector<IngestWarning> warnings;
  std::size_t duplicates = 0;
};

struct LoadOptions {
  NormalizeOptions normalize;
  unsigned workers = 0;  // 0 = hardware concurrency
  /// Fetches one URL body; the default handles file:// and http(s)://.
  std::function<std::string(const std::string& url)> fetch;
};

LoadResult load_sources(const std::vector<MailboxSource>& sources, const LoadOptions& options = {});

/// Default fetcher used by load_sources; throws Error(io) on failure.
std::string fetch_url(const std::string& url);

}  // namespace liststand
