#include "crossgan/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <tuple>

#include "crossgan/config.hpp"
#include "crossgan/error.hpp"

namespace crossgan {
namespace fs = std::filesystem;

std::string to_string(EmbeddingSource s) {
  return s == EmbeddingSource::kDiscriminator ? "discriminator" : "classifier";
}

EmbeddingSource parse_source(const std::string& text) {
  if (text == "discriminator") return EmbeddingSource::kDiscriminator;
  if (text == "classifier") return EmbeddingSource::kClassifier;
  throw ConfigError("unknown embedding source '" + text + "' (expected discriminator or classifier)");
}

Tensor<float> embed(Model& model, const Tensor<float>& images, EmbeddingSource source, Domain domain) {
  if (source == EmbeddingSource::kClassifier && !model.has_classifier()) {
    throw ConfigError("classifier embeddings need a dann checkpoint, got " +
                      to_string(model.spec().regime));
  }
  constexpr std::size_t kChunk = 32;
  auto& d = model.discriminator(domain);
  const std::size_t m = images.dim(0);
  std::vector<float> out;
  std::size_t width = 0;
  for (std::size_t begin = 0; begin < m; begin += kChunk) {
    const std::size_t end = std::min(m, begin + kChunk);
    Tensor<float> rows = d.trunk_forward(slice_batch(images, begin, end), Mode::kInference).output;
    if (source == EmbeddingSource::kClassifier) {
      rows = model.classifier().forward(rows, Mode::kInference).hidden();
    }
    width = rows.row_size();
    out.insert(out.end(), rows.storage().begin(), rows.storage().end());
  }
  return Tensor<float>({m, width}, std::move(out));
}

EmbeddingIndex::EmbeddingIndex(Tensor<float> vectors, std::vector<FrameId> frame_ids,
                               std::vector<Domain> domains, EmbeddingSource source,
                               std::string fingerprint)
    : vectors_(std::move(vectors)),
      frame_ids_(std::move(frame_ids)),
      domains_(std::move(domains)),
      source_(source),
      fingerprint_(std::move(fingerprint)) {
  if (vectors_.rank() != 2 || vectors_.dim(0) != frame_ids_.size() ||
      domains_.size() != frame_ids_.size()) {
    throw std::invalid_argument("index rows, frame ids and domains must align");
  }
}

std::span<const float> EmbeddingIndex::row_of(FrameId id) const {
  const auto it = std::find(frame_ids_.begin(), frame_ids_.end(), id);
  if (it == frame_ids_.end()) throw ConfigError("frame " + std::to_string(id) + " is not indexed");
  return vectors_.row(static_cast<std::size_t>(it - frame_ids_.begin()));
}

EmbeddingIndex build_index(Model& model, const std::string& fingerprint, const Corpus& corpus,
                           EmbeddingSource source, int resolution, std::size_t batch_size,
                           bool allow_any_resolution) {
  if (corpus.size() == 0) throw ConfigError("cannot index an empty corpus");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  const auto& records = corpus.records();
  std::vector<float> data;
  std::vector<FrameId> ids;
  std::vector<Domain> domains;
  std::size_t width = 0;
  for (std::size_t begin = 0; begin < records.size(); begin += batch_size) {
    const std::size_t end = std::min(records.size(), begin + batch_size);
    for (Domain d : {Domain::kS, Domain::kL}) {
      std::vector<FrameId> chunk;
      for (std::size_t i = begin; i < end; ++i) {
        if (records[i].domain == d) chunk.push_back(records[i].frame_id);
      }
      if (chunk.empty()) continue;
      const auto batch = load_batch(corpus, chunk, resolution, allow_any_resolution);
      const auto rows = embed(model, batch.data, source, d);
      width = rows.row_size();
      data.insert(data.end(), rows.storage().begin(), rows.storage().end());
      ids.insert(ids.end(), chunk.begin(), chunk.end());
      domains.insert(domains.end(), chunk.size(), d);
    }
  }
  // Restore corpus order within each chunk.
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::map<FrameId, std::size_t> position;
  for (std::size_t i = 0; i < records.size(); ++i) position[records[i].frame_id] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return position[ids[a]] < position[ids[b]]; });
  std::vector<float> sorted(data.size());
  std::vector<FrameId> sorted_ids(ids.size());
  std::vector<Domain> sorted_domains(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(order[i] * width), width,
                sorted.begin() + static_cast<std::ptrdiff_t>(i * width));
    sorted_ids[i] = ids[order[i]];
    sorted_domains[i] = domains[order[i]];
  }
  const std::size_t n = sorted_ids.size();
  return EmbeddingIndex(Tensor<float>({n, width}, std::move(sorted)),
                        std::move(sorted_ids), std::move(sorted_domains), source, fingerprint);
}

EmbeddingIndex build_index(const Checkpoint& ckpt, const Corpus& corpus, EmbeddingSource source,
                           std::size_t batch_size) {
  Model model(ModelSpec::read(ckpt.manifest), ckpt.params.clone());
  const int res = model.spec().generator.resolution;
  const bool supported = std::find(std::begin(kSupportedResolutions), std::end(kSupportedResolutions),
                                   res) != std::end(kSupportedResolutions);
  return build_index(model, fingerprint(ckpt.params), corpus, source, res, batch_size, !supported);
}

// -------------------------------------------------------------- index I/O

void save_index(const fs::path& dir, const EmbeddingIndex& index) {
  fs::create_directories(dir);
  KeyValues kv;
  kv["source"] = to_string(index.source());
  kv["dim"] = std::to_string(index.dim());
  kv["count"] = std::to_string(index.size());
  kv["fingerprint"] = index.fingerprint();
  write_key_values(dir / "manifest.txt", kv);

  std::string frames;
  for (std::size_t i = 0; i < index.size(); ++i) {
    frames += std::to_string(index.frame_ids()[i]) + "\t" + to_string(index.domains()[i]) + "\n";
  }
  write_text_file(dir / "frames.tsv", frames);

  std::string bytes(index.vectors().size() * 4, '\0');
  for (std::size_t i = 0; i < index.vectors().size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &index.vectors()[i], 4);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  std::ofstream out(dir / "vectors.bin", std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + (dir / "vectors.bin").string());
}

EmbeddingIndex load_index(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("index directory does not exist: " + dir.string());
  const KeyValues kv = read_key_values(dir / "manifest.txt");
  const auto dim = static_cast<std::size_t>(require_int(kv, "dim"));
  const auto count = static_cast<std::size_t>(require_int(kv, "count"));

  std::vector<FrameId> ids;
  std::vector<Domain> domains;
  std::istringstream frames(read_text_file(dir / "frames.tsv"));
  std::string line;
  while (std::getline(frames, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IoError("malformed frames.tsv line: " + line);
    ids.push_back(parse_int(line.substr(0, tab), "frame_id"));
    domains.push_back(parse_domain(line.substr(tab + 1)));
  }
  const std::string bytes = read_text_file(dir / "vectors.bin");
  if (ids.size() != count || bytes.size() != count * dim * 4) {
    throw IoError("index files under " + dir.string() + " disagree with the manifest");
  }
  std::vector<float> values(count * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    }
    std::memcpy(&values[i], &bits, 4);
  }
  return EmbeddingIndex(Tensor<float>({count, dim}, std::move(values)), std::move(ids),
                        std::move(domains), parse_source(require(kv, "source")),
                        require(kv, "fingerprint"));
}

// ------------------------------------------------------------------- knn

double euclidean(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<Neighbor> knn(const EmbeddingIndex& index, std::span<const float> query, std::size_t k,
                          std::optional<Domain> domain) {
  if (k == 0) throw ConfigError("k must be at least 1");
  if (query.size() != index.dim()) {
    throw ConfigError("query has dimension " + std::to_string(query.size()) + ", index has " +
                      std::to_string(index.dim()));
  }
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (domain && index.domains()[i] != *domain) continue;
    all.push_back({index.frame_ids()[i], euclidean(query, index.vectors().row(i))});
  }
  const auto less = [](const Neighbor& a, const Neighbor& b) {
    return std::tie(a.distance, a.frame_id) < std::tie(b.distance, b.frame_id);
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
  all.resize(k);
  return all;
}

// -------------------------------------------------------------- episodes

std::vector<EpisodeBag> episode_bags(const EmbeddingIndex& index, const Corpus& corpus) {
  std::map<FrameId, std::size_t> row;
  for (std::size_t i = 0; i < index.size(); ++i) row[index.frame_ids()[i]] = i;
  std::vector<EpisodeBag> bags;
  for (const auto& [episode, ids] : corpus.episodes()) {
    EpisodeBag bag;
    bag.episode_id = episode;
    bag.domain = corpus.episode_domain(episode);
    std::vector<float> data;
    for (FrameId id : ids) {
      const auto it = row.find(id);
      if (it == row.end()) throw ConfigError("frame " + std::to_string(id) + " is not indexed");
      const auto r = index.vectors().row(it->second);
      data.insert(data.end(), r.begin(), r.end());
      bag.frame_ids.push_back(id);
    }
    bag.rows = Tensor<float>({ids.size(), index.dim()}, std::move(data));
    bags.push_back(std::move(bag));
  }
  return bags;
}

EpisodeMatch match_episodes(const EpisodeBag& query, const EpisodeBag& candidate,
                            PairAggregate aggregate) {
  const std::size_t nq = query.rows.rank() == 2 ? query.rows.dim(0) : 0;
  const std::size_t nc = candidate.rows.rank() == 2 ? candidate.rows.dim(0) : 0;
  if (nq == 0 || nc == 0) throw ConfigError("episode bags must hold at least one frame");
  if (query.rows.dim(1) != candidate.rows.dim(1)) {
    throw ConfigError("episode bags have different embedding dimensions");
  }
  std::vector<FramePair> cross;
  cross.reserve(nq * nc);
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      cross.push_back({i, j, euclidean(query.rows.row(i), candidate.rows.row(j))});
    }
  }
  std::sort(cross.begin(), cross.end(), [](const FramePair& a, const FramePair& b) {
    return std::tie(a.distance, a.query_row, a.candidate_row) <
           std::tie(b.distance, b.query_row, b.candidate_row);
  });
  std::vector<bool> used_q(nq, false), used_c(nc, false);
  EpisodeMatch match;
  const std::size_t target = std::min(nq, nc);
  for (const auto& p : cross) {
    if (match.pairs.size() == target) break;
    if (used_q[p.query_row] || used_c[p.candidate_row]) continue;
    used_q[p.query_row] = used_c[p.candidate_row] = true;
    match.pairs.push_back(p);
  }
  if (aggregate == PairAggregate::kMinimum) {
    match.distance = match.pairs.front().distance;
  } else {
    double s = 0.0;
    for (const auto& p : match.pairs) s += p.distance;
    match.distance = s / static_cast<double>(match.pairs.size());
  }
  return match;
}

double episode_distance(const EpisodeBag& query, const EpisodeBag& candidate, PairAggregate aggregate) {
  return match_episodes(query, candidate, aggregate).distance;
}

Retrieval retrieve_episodes(const EpisodeBag& query, const std::vector<EpisodeBag>& candidates,
                            std::size_t top, PairAggregate aggregate) {
  Retrieval out;
  if (candidates.empty()) return out;
  std::vector<std::pair<RankedEpisode, std::size_t>> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ranked.push_back({{candidates[i].episode_id, episode_distance(query, candidates[i], aggregate)}, i});
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.distance, a.first.episode_id) < std::tie(b.first.distance, b.first.episode_id);
  });
  const std::size_t n = std::min(top, ranked.size());
  for (std::size_t i = 0; i < n; ++i) out.ranking.push_back(ranked[i].first);
  if (n > 0) out.top_match = match_episodes(query, candidates[ranked.front().second], aggregate);
  return out;
}

}  // namespace crossgan
