#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "crossgan/config.hpp"
#include "crossgan/params.hpp"
#include "crossgan/tensor.hpp"

namespace crossgan {

/// Array file: u64 rank, rank x u64 dims, then float32 values, all
/// little-endian, values row-major.
std::string encode_array(const Tensor<float>& t);
Tensor<float> decode_array(const std::string& bytes, const std::string& what);
void write_array(const std::filesystem::path& path, const Tensor<float>& t);
Tensor<float> read_array(const std::filesystem::path& path);

/// Parameters plus auxiliary arrays (optimizer moments) plus a manifest.
///
/// On disk:
///   <dir>/manifest.txt          key=value: caller keys, "param.<name>" and
///                               "extra.<name>" entries, "alias.<name>"
///   <dir>/params/<name>.bin     one array file per distinct parameter storage
///   <dir>/extra/<name>.bin      one array file per auxiliary array
/// Names containing '/' map to subdirectories. Entries sharing storage are
/// written once and re-aliased on load.
struct Checkpoint {
  KeyValues manifest;
  NetworkParams<float> params;
  std::map<std::string, Tensor<float>> extras;
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// FNV-1a 64 over parameter names, shapes and values, hex encoded.
std::string fingerprint(const NetworkParams<float>& params);

}  // namespace crossgan
