#include "crossgan/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crossgan/error.hpp"

namespace crossgan {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
    }
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

KeyValues read_key_values(const std::filesystem::path& path) {
  try {
    return parse_key_values(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  write_text_file(path, format_key_values(kv));
}

const std::string& require(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("missing key: " + key);
  return it->second;
}

long long parse_int(const std::string& text, const std::string& what) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(what + ": not an integer: '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(what + ": not an unsigned integer: '" + text + "'");
  }
  return v;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": not a number: '" + text + "'");
  }
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(what + ": expected true/false, got '" + text + "'");
}

long long require_int(const KeyValues& kv, const std::string& key) {
  return parse_int(require(kv, key), key);
}
double require_double(const KeyValues& kv, const std::string& key) {
  return parse_double(require(kv, key), key);
}
bool require_bool(const KeyValues& kv, const std::string& key) {
  return parse_bool(require(kv, key), key);
}

std::string format_double(double v) {
  char buf[64];
  std::to_chars_result r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace crossgan
