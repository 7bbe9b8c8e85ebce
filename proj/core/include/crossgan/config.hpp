#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace crossgan {

/// Flat UTF-8 `key=value` records, one per line. Blank lines and lines
/// starting with '#' are ignored. Written in key order.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
std::string format_key_values(const KeyValues& kv);

KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

/// Typed lookups that throw ConfigError naming the key.
const std::string& require(const KeyValues& kv, const std::string& key);
long long require_int(const KeyValues& kv, const std::string& key);
double require_double(const KeyValues& kv, const std::string& key);
bool require_bool(const KeyValues& kv, const std::string& key);

long long parse_int(const std::string& text, const std::string& what);
std::uint64_t parse_uint(const std::string& text, const std::string& what);
double parse_double(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);
/// Shortest round-trip decimal form.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace crossgan
