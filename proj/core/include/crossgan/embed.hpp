#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crossgan/checkpoint.hpp"
#include "crossgan/corpus.hpp"
#include "crossgan/model.hpp"
#include "crossgan/tensor.hpp"

namespace crossgan {

/// Which penultimate layer provides the similarity space.
enum class EmbeddingSource { kDiscriminator, kClassifier };

std::string to_string(EmbeddingSource s);
EmbeddingSource parse_source(const std::string& text);

/// Penultimate activations (m, D) in inference mode, rows aligned with the
/// input. D is the discriminator feature width F or the classifier width C.
/// Cogan models embed with the discriminator of `domain`.
Tensor<float> embed(Model& model, const Tensor<float>& images, EmbeddingSource source,
                    Domain domain = Domain::kS);

/// Embeddings of every corpus frame, in corpus order.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  EmbeddingIndex(Tensor<float> vectors, std::vector<FrameId> frame_ids, std::vector<Domain> domains,
                 EmbeddingSource source, std::string fingerprint);

  const Tensor<float>& vectors() const noexcept { return vectors_; }
  const std::vector<FrameId>& frame_ids() const noexcept { return frame_ids_; }
  const std::vector<Domain>& domains() const noexcept { return domains_; }
  EmbeddingSource source() const noexcept { return source_; }
  const std::string& fingerprint() const noexcept { return fingerprint_; }
  std::size_t size() const noexcept { return frame_ids_.size(); }
  std::size_t dim() const noexcept { return vectors_.empty() ? 0 : vectors_.row_size(); }
  /// Row of a frame id.
  std::span<const float> row_of(FrameId id) const;

 private:
  Tensor<float> vectors_;
  std::vector<FrameId> frame_ids_;
  std::vector<Domain> domains_;
  EmbeddingSource source_ = EmbeddingSource::kDiscriminator;
  std::string fingerprint_;
};

/// Embeds the corpus in batches of `batch_size`. Each frame is embedded
/// with the discriminator of its own domain when the model has two.
EmbeddingIndex build_index(Model& model, const std::string& fingerprint, const Corpus& corpus,
                           EmbeddingSource source, int resolution, std::size_t batch_size,
                           bool allow_any_resolution = false);
EmbeddingIndex build_index(const Checkpoint& ckpt, const Corpus& corpus, EmbeddingSource source,
                           std::size_t batch_size);

/// Directory with manifest.txt (source, dim, count, fingerprint),
/// frames.tsv (frame_id, domain) and vectors.bin (row-major little-endian
/// float32, no header).
void save_index(const std::filesystem::path& dir, const EmbeddingIndex& index);
EmbeddingIndex load_index(const std::filesystem::path& dir);

struct Neighbor {
  FrameId frame_id = 0;
  double distance = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Euclidean distance accumulated in double.
double euclidean(std::span<const float> a, std::span<const float> b);

/// Exact k nearest rows by Euclidean distance, ascending, ties by frame id;
/// k is clamped to the number of rows passing the filter.
std::vector<Neighbor> knn(const EmbeddingIndex& index, std::span<const float> query, std::size_t k,
                          std::optional<Domain> domain = std::nullopt);

/// The frames of one episode in embedding space.
struct EpisodeBag {
  std::string episode_id;
  Domain domain = Domain::kS;
  std::vector<FrameId> frame_ids;
  Tensor<float> rows;  ///< (frames, D)
};

/// One bag per episode of the corpus, rows taken from the index.
std::vector<EpisodeBag> episode_bags(const EmbeddingIndex& index, const Corpus& corpus);

/// How accepted frame pairs are reduced to an episode distance.
enum class PairAggregate { kMinimum, kMean };

struct FramePair {
  std::size_t query_row = 0;
  std::size_t candidate_row = 0;
  double distance = 0.0;
};

struct EpisodeMatch {
  double distance = 0.0;
  /// Accepted pairs in acceptance (ascending distance) order.
  std::vector<FramePair> pairs;
};

/// Greedy one-to-one matching: cross pairs are visited in ascending
/// distance (ties by query row, then candidate row) and accepted while both
/// frames are unpaired, until the smaller bag is exhausted.
EpisodeMatch match_episodes(const EpisodeBag& query, const EpisodeBag& candidate,
                            PairAggregate aggregate = PairAggregate::kMinimum);
double episode_distance(const EpisodeBag& query, const EpisodeBag& candidate,
                        PairAggregate aggregate = PairAggregate::kMinimum);

struct RankedEpisode {
  std::string episode_id;
  double distance = 0.0;
};

struct Retrieval {
  std::vector<RankedEpisode> ranking;
  /// Matched pairs between the query and the top-ranked candidate.
  EpisodeMatch top_match;
};

/// Candidates ranked by episode distance, ties by episode id, cut to `top`.
Retrieval retrieve_episodes(const EpisodeBag& query, const std::vector<EpisodeBag>& candidates,
                            std::size_t top, PairAggregate aggregate = PairAggregate::kMinimum);

}  // namespace crossgan
