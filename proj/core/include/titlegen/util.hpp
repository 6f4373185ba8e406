#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace titlegen {

/// 64-bit FNV-1a over a byte range. Used for artifact/content hashes in
/// manifests; stable across runs and platforms.
uint64_t fnv1a64(std::string_view bytes);
uint64_t fnv1a64_combine(uint64_t seed, std::string_view bytes);

/// Hash rendered as a fixed-width lowercase hex string.
std::string hash_hex(uint64_t h);

/// FNV-1a of a whole file's contents.
uint64_t file_hash(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& tokens, std::string_view sep);

/// Seconds since the Unix epoch -> UTC calendar year.
int utc_year(int64_t epoch_seconds);

/// Parse an ISO-8601 UTC timestamp ("2020-01-02T03:04:05", optional
/// fractional seconds and trailing 'Z') to epoch seconds. Fractions are
/// truncated. Throws IoError on malformed input.
int64_t parse_iso8601_utc(std::string_view s);

/// Epoch seconds -> "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601_utc(int64_t epoch_seconds);

}  // namespace titlegen
