#include "crossgan/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "crossgan/error.hpp"

namespace crossgan {
namespace fs = std::filesystem;
namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const std::string& in, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

std::string shape_text(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out.empty() ? "scalar" : out;
}

fs::path array_path(const fs::path& root, const std::string& name) {
  if (name.empty() || name.find("..") != std::string::npos || name.front() == '/') {
    throw ConfigError("invalid array name: " + name);
  }
  return root / (name + ".bin");
}

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ULL;
    }
  }
};

}  // namespace

std::string encode_array(const Tensor<float>& t) {
  std::string out;
  out.reserve(8 + 8 * t.rank() + 4 * t.size());
  put_u64(out, t.rank());
  for (std::size_t d : t.shape()) put_u64(out, d);
  for (float v : t.storage()) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  return out;
}

Tensor<float> decode_array(const std::string& bytes, const std::string& what) {
  if (bytes.size() < 8) throw IoError(what + ": truncated array header");
  const std::uint64_t rank = get_u64(bytes, 0);
  if (rank > 16 || bytes.size() < 8 + 8 * rank) throw IoError(what + ": bad array rank");
  Shape shape(rank);
  for (std::size_t i = 0; i < rank; ++i) shape[i] = get_u64(bytes, 8 + 8 * i);
  const std::size_t n = shape_size(shape);
  const std::size_t offset = 8 + 8 * rank;
  if (bytes.size() != offset + 4 * n) {
    throw IoError(what + ": array payload size does not match shape " + shape_to_string(shape));
  }
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 4 * i + b]))
              << (8 * b);
    }
    data[i] = std::bit_cast<float>(bits);
  }
  return Tensor<float>(std::move(shape), std::move(data));
}

void write_array(const fs::path& path, const Tensor<float>& t) {
  write_text_file(path, encode_array(t));
}

Tensor<float> read_array(const fs::path& path) {
  return decode_array(read_text_file(path), path.string());
}

void save_checkpoint(const fs::path& dir, const Checkpoint& ckpt) {
  fs::create_directories(dir);
  KeyValues manifest = ckpt.manifest;
  std::unordered_map<const Param<float>*, std::string> written;
  for (const auto& [name, h] : ckpt.params.entries()) {
    auto it = written.find(h.get());
    if (it != written.end()) {
      manifest["alias." + name] = it->second;
      continue;
    }
    written.emplace(h.get(), name);
    manifest["param." + name] =
        shape_text(h->value.shape()) + (h->trainable ? " trainable" : " buffer");
    write_array(array_path(dir / "params", name), h->value);
  }
  for (const auto& [name, t] : ckpt.extras) {
    manifest["extra." + name] = shape_text(t.shape());
    write_array(array_path(dir / "extra", name), t);
  }
  manifest["params.seed"] = std::to_string(ckpt.params.seed());
  manifest["params.fingerprint"] = fingerprint(ckpt.params);
  write_key_values(dir / "manifest.txt", manifest);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.txt")) {
    throw ConfigError("not a checkpoint directory (no manifest.txt): " + dir.string());
  }
  Checkpoint ckpt;
  KeyValues all = read_key_values(dir / "manifest.txt");
  ckpt.params.set_seed(parse_uint(require(all, "params.seed"), "params.seed"));
  std::vector<std::pair<std::string, std::string>> aliases;
  for (const auto& [key, value] : all) {
    if (key.starts_with("param.")) {
      const std::string name = key.substr(6);
      const bool trainable = !value.ends_with(" buffer");
      ckpt.params.add(name, read_array(array_path(dir / "params", name)), trainable);
    } else if (key.starts_with("extra.")) {
      const std::string name = key.substr(6);
      ckpt.extras.emplace(name, read_array(array_path(dir / "extra", name)));
    } else if (key.starts_with("alias.")) {
      aliases.emplace_back(key.substr(6), value);
    } else if (key != "params.seed" && key != "params.fingerprint") {
      ckpt.manifest.emplace(key, value);
    }
  }
  for (const auto& [name, target] : aliases) {
    ckpt.params.add_handle(name, ckpt.params.handle(target));
  }
  const std::string fp = fingerprint(ckpt.params);
  if (fp != require(all, "params.fingerprint")) {
    throw IoError("checkpoint " + dir.string() + " is corrupt: fingerprint " + fp +
                  " does not match manifest " + require(all, "params.fingerprint"));
  }
  return ckpt;
}

std::string fingerprint(const NetworkParams<float>& params) {
  Fnv fnv;
  for (const auto& [name, h] : params.entries()) {
    fnv.bytes(name.data(), name.size());
    std::string header;
    put_u64(header, h->value.rank());
    for (std::size_t d : h->value.shape()) put_u64(header, d);
    fnv.bytes(header.data(), header.size());
    for (float v : h->value.storage()) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
      const unsigned char le[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                   static_cast<unsigned char>(bits >> 16),
                                   static_cast<unsigned char>(bits >> 24)};
      fnv.bytes(le, 4);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv.h));
  return buf;
}

}  // namespace crossgan
