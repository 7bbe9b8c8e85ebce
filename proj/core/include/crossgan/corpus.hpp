#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crossgan/image.hpp"
#include "crossgan/tensor.hpp"

namespace crossgan {

/// The two series: S (source) and L (second).
enum class Domain : int { kS = 0, kL = 1 };

std::string to_string(Domain d);
Domain parse_domain(const std::string& text);
inline int domain_index(Domain d) { return static_cast<int>(d); }

using FrameId = std::int64_t;

struct FrameRecord {
  FrameId frame_id = 0;
  Domain domain = Domain::kS;
  /// "<domain directory>/<episode directory>", unique across domains.
  std::string episode_id;
  int frame_index = 0;
  std::filesystem::path path;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// Immutable collection of frames grouped into episodes.
class Corpus {
 public:
  Corpus() = default;
  /// Validates unique frame ids, unique (episode, frame_index) pairs and one
  /// domain per episode.
  explicit Corpus(std::vector<FrameRecord> records);

  const std::vector<FrameRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::set<Domain>& domains_present() const noexcept { return domains_; }
  /// episode id -> frame ids ordered by frame_index.
  const std::map<std::string, std::vector<FrameId>>& episodes() const noexcept {
    return episodes_;
  }
  const FrameRecord& find(FrameId id) const;
  bool contains(FrameId id) const { return index_.count(id) > 0; }
  /// Frame ids (ascending) of one domain, or all frames.
  std::vector<FrameId> ids(std::optional<Domain> domain = std::nullopt) const;
  Domain episode_domain(const std::string& episode_id) const;

 private:
  std::vector<FrameRecord> records_;
  std::set<Domain> domains_;
  std::map<std::string, std::vector<FrameId>> episodes_;
  std::map<FrameId, std::size_t> index_;
};

/// Subdirectory name of the corpus root -> domain.
using DomainMap = std::map<std::string, Domain>;

struct ScanResult {
  Corpus corpus;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Walks <root>/<domain dir>/<episode dir>/<frame>.{png,jpg,jpeg}. Records
/// are ordered by (domain, episode id, filename); frame_index follows
/// filename order; frame ids are 0..N-1 in record order. Files that are not
/// decodable images are skipped with a warning.
ScanResult scan_corpus(const std::filesystem::path& root, const DomainMap& domain_map);

/// Tab-separated: frame_id, domain, episode_id, frame_index, path.
void write_manifest(const std::filesystem::path& path, const Corpus& corpus);
Corpus read_manifest(const std::filesystem::path& path);

inline constexpr int kSupportedResolutions[] = {64, 128, 256};

/// Normalized images, values in [-1, 1].
struct ImageBatch {
  Tensor<float> data;  ///< (b, 3, H, W)
  std::vector<Domain> domains;
  std::vector<FrameId> frame_ids;

  std::size_t size() const { return data.empty() ? 0 : data.dim(0); }
};

/// Decodes, bilinearly resizes and normalizes the given frames in order.
/// `allow_any_resolution` admits the small test-network sizes.
ImageBatch load_batch(const Corpus& corpus, const std::vector<FrameId>& ids, int resolution,
                      bool allow_any_resolution = false);

/// Seeded epoch-wise permutation of the (optionally domain-filtered) frames,
/// chunked into batches of `batch_size`; the short tail of each epoch is
/// dropped. Batch k is a pure function of (seed, k).
class MinibatchStream {
 public:
  MinibatchStream(const Corpus& corpus, std::size_t batch_size, std::optional<Domain> filter,
                  std::uint64_t seed);

  std::size_t batches_per_epoch() const noexcept { return batches_per_epoch_; }
  std::size_t batch_size() const noexcept { return batch_size_; }
  /// Frame ids of global batch number `index` (epoch = index / batches_per_epoch).
  std::vector<FrameId> batch_ids(std::uint64_t index) const;
  /// Frame ids of the next batch; advances the position.
  std::vector<FrameId> next_ids() { return batch_ids(position_++); }
  ImageBatch next(int resolution, bool allow_any_resolution = false);

  std::uint64_t position() const noexcept { return position_; }
  void seek(std::uint64_t position) noexcept { position_ = position; }

 private:
  std::vector<FrameId> epoch_order(std::uint64_t epoch) const;

  const Corpus* corpus_;
  std::vector<FrameId> pool_;
  std::size_t batch_size_;
  std::size_t batches_per_epoch_;
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  mutable std::uint64_t cached_epoch_ = ~std::uint64_t{0};
  mutable std::vector<FrameId> cached_order_;
};

/// Writes a two-style procedural corpus under `root` (S: warm palette,
/// L: cool palette; random rectangles and ellipses) and scans it.
Corpus synth_corpus(const std::filesystem::path& root, int episodes_per_domain,
                    int frames_per_episode, int resolution, std::uint64_t seed);

}  // namespace crossgan
