#include "liststand/timestamp.hpp"

#include "liststand/text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <vector>

namespace liststand {
namespace {

using namespace std::chrono;

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

int month_from_name(std::string_view name) {
  static constexpr std::array<std::string_view, 12> names{
      "jan", "feb", "mar", "apr", "may", "jun",
      "jul", "aug", "sep", "oct", "nov", "dec"};
  if (name.size() < 3) return 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (text::istarts_with(name, names[i])) return static_cast<int>(i) + 1;
  }
  return 0;
}

bool is_weekday(std::string_view name) {
  static constexpr std::array<std::string_view, 7> names{
      "mon", "tue", "wed", "thu", "fri", "sat", "sun"};
  for (auto n : names) {
    if (name.size() >= 3 && text::istarts_with(name, n)) return true;
  }
  return false;
}

// "HH:MM" or "HH:MM:SS"
bool parse_clock(std::string_view s, int& h, int& m, int& sec) {
  auto parts = text::split(s, ':');
  if (parts.size() < 2 || parts.size() > 3) return false;
  sec = 0;
  if (!parse_int(parts[0], h) || !parse_int(parts[1], m)) return false;
  if (parts.size() == 3) {
    // fractional seconds occasionally show up
    std::string_view secs = parts[2];
    if (auto dot = secs.find('.'); dot != std::string_view::npos) secs = secs.substr(0, dot);
    if (!parse_int(secs, sec)) return false;
  }
  if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec > 60) return false;
  if (sec == 60) sec = 59;
  return true;
}

// Offset east of UTC in minutes.
std::optional<int> parse_zone(std::string_view z) {
  if (z.empty()) return std::nullopt;
  if (z[0] == '+' || z[0] == '-') {
    std::string digits;
    for (char c : z.substr(1)) {
      if (c != ':') digits.push_back(c);
    }
    int v = 0;
    if (digits.size() != 4 || !parse_int(digits, v)) return std::nullopt;
    int minutes = (v / 100) * 60 + v % 100;
    return z[0] == '-' ? -minutes : minutes;
  }
  struct Named { std::string_view name; int hours; };
  static constexpr std::array<Named, 13> named{{
      {"ut", 0}, {"utc", 0}, {"gmt", 0}, {"z", 0},
      {"est", -5}, {"edt", -4}, {"cst", -6}, {"cdt", -5},
      {"mst", -7}, {"mdt", -6}, {"pst", -8}, {"pdt", -7}, {"cet", 1}}};
  std::string lower = text::to_lower(z);
  for (const auto& n : named) {
    if (lower == n.name) return n.hours * 60;
  }
  // Unknown alphabetic zones are treated as UTC (RFC 5322 obs-zone).
  bool alpha = true;
  for (char c : z) alpha = alpha && std::isalpha(static_cast<unsigned char>(c));
  if (alpha) return 0;
  return std::nullopt;
}

int expand_year(int y, std::size_t digits) {
  if (digits <= 2) return y < 50 ? 2000 + y : 1900 + y;
  if (digits == 3) return 1900 + y;
  return y;
}

std::optional<Timestamp> assemble(int y, int mon, int d, int h, int mi, int s,
                                  int offset_minutes) {
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mon)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  return t - minutes{offset_minutes};
}

std::vector<std::string_view> tokens_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != ',') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string strip_comments(std::string_view s) {
  std::string out;
  int depth = 0;
  for (char c : s) {
    if (c == '(') {
      ++depth;
    } else if (c == ')' && depth > 0) {
      --depth;
    } else if (depth == 0) {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

Timestamp make_timestamp(int y, unsigned mon, unsigned d, int h, int mi, int s) {
  return sys_days{year{y} / month{mon} / day{d}} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_iso8601(Timestamp t) {
  auto dp = floor<days>(t);
  year_month_day ymd{dp};
  hh_mm_ss hms{t - dp};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::optional<Timestamp> parse_iso8601(std::string_view s) {
  s = text::trim(s);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, mon = 0, d = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mon) ||
      !parse_int(s.substr(8, 2), d)) {
    return std::nullopt;
  }
  int h = 0, mi = 0, sec = 0, offset = 0;
  std::string_view rest = s.substr(10);
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != ' ') return std::nullopt;
    rest.remove_prefix(1);
    std::size_t zone_at = rest.find_first_of("Z+-");
    std::string_view clock = rest.substr(0, zone_at);
    if (!parse_clock(clock, h, mi, sec)) return std::nullopt;
    if (zone_at != std::string_view::npos) {
      auto z = parse_zone(rest.substr(zone_at) == "Z" ? std::string_view("Z") : rest.substr(zone_at));
      if (!z) return std::nullopt;
      offset = *z;
    }
  }
  return assemble(y, mon, d, h, mi, sec, offset);
}

std::optional<Timestamp> parse_rfc2822_date(std::string_view raw) {
  std::string cleaned = strip_comments(raw);
  auto toks = tokens_of(cleaned);
  std::size_t i = 0;
  if (i < toks.size() && is_weekday(toks[i]) && month_from_name(toks[i]) == 0) ++i;
  if (toks.size() >= i + 4) {
    int d = 0, y = 0, h = 0, mi = 0, s = 0;
    int mon = 0;
    std::string_view day_tok = toks[i], mon_tok = toks[i + 1];
    // Some clients write "Apr 1 2002" instead of "1 Apr 2002".
    if (month_from_name(day_tok) != 0) std::swap(day_tok, mon_tok);
    mon = month_from_name(mon_tok);
    if (mon != 0 && parse_int(day_tok, d) && parse_int(toks[i + 2], y) &&
        parse_clock(toks[i + 3], h, mi, s)) {
      y = expand_year(y, toks[i + 2].size());
      int offset = 0;
      if (toks.size() > i + 4) {
        if (auto z = parse_zone(toks[i + 4])) offset = *z;
      }
      return assemble(y, mon, d, h, mi, s, offset);
    }
  }
  // asctime-shaped Date headers: "Mon Apr  1 12:00:00 2002"
  if (auto t = parse_envelope_date("From x " + cleaned)) return t;
  return parse_iso8601(raw);
}

std::optional<Timestamp> parse_envelope_date(std::string_view line) {
  auto toks = tokens_of(line);
  for (std::size_t i = 1; i + 2 < toks.size(); ++i) {
    int mon = month_from_name(toks[i]);
    int d = 0, h = 0, mi = 0, s = 0;
    if (mon == 0 || !parse_int(toks[i + 1], d) || !parse_clock(toks[i + 2], h, mi, s)) continue;
    int offset = 0;
    for (std::size_t j = i + 3; j < toks.size() && j < i + 5; ++j) {
      int y = 0;
      if (toks[j].size() == 4 && parse_int(toks[j], y)) {
        if (j + 1 < toks.size() && j == i + 3) {
          if (auto z = parse_zone(toks[j + 1])) offset = *z;
        }
        return assemble(y, mon, d, h, mi, s, offset);
      }
      if (auto z = parse_zone(toks[j])) offset = *z;
    }
  }
  return std::nullopt;
}


}  // namespace liststand
