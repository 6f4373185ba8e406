#include "titlegen/util.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include "titlegen/errors.hpp"

namespace titlegen {

uint64_t fnv1a64_combine(uint64_t seed, std::string_view bytes) {
  uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= static_cast<uint64_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a64(std::string_view bytes) {
  return fnv1a64_combine(0xcbf29ce484222325ull, bytes);
}

std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

uint64_t file_hash(const std::string& path) { return fnv1a64(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("short write: " + path);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

int utc_year(int64_t epoch_seconds) {
  using namespace std::chrono;
  sys_seconds tp{seconds{epoch_seconds}};
  year_month_day ymd{floor<days>(tp)};
  return static_cast<int>(ymd.year());
}

namespace {

int parse_int_field(std::string_view s, size_t pos, size_t len) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
  if (ec != std::errc() || ptr != s.data() + pos + len) {
    throw IoError("bad timestamp: " + std::string(s));
  }
  return value;
}

}  // namespace

int64_t parse_iso8601_utc(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.fff...][Z]
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' ||
      (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
    throw IoError("bad timestamp: " + std::string(s));
  }
  int y = parse_int_field(s, 0, 4);
  int mo = parse_int_field(s, 5, 2);
  int d = parse_int_field(s, 8, 2);
  int h = parse_int_field(s, 11, 2);
  int mi = parse_int_field(s, 14, 2);
  int sec = parse_int_field(s, 17, 2);

  size_t rest = 19;
  if (rest < s.size() && s[rest] == '.') {
    ++rest;
    while (rest < s.size() && std::isdigit(static_cast<unsigned char>(s[rest]))) ++rest;
  }
  if (rest < s.size() && s[rest] == 'Z') ++rest;
  if (rest != s.size()) throw IoError("bad timestamp: " + std::string(s));

  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw IoError("bad calendar date: " + std::string(s));
  sys_days date{ymd};
  return duration_cast<seconds>(date.time_since_epoch()).count() + h * 3600 +
         mi * 60 + sec;
}

std::string format_iso8601_utc(int64_t epoch_seconds) {
  using namespace std::chrono;
  sys_seconds tp{seconds{epoch_seconds}};
  auto date = floor<days>(tp);
  year_month_day ymd{date};
  auto tod = tp - date;
  int h = static_cast<int>(duration_cast<hours>(tod).count());
  int mi = static_cast<int>(duration_cast<minutes>(tod).count() % 60);
  int sec = static_cast<int>(duration_cast<seconds>(tod).count() % 60);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), h, mi, sec);
  return buf;
}

}  // namespace titlegen
