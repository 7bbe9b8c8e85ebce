#include "crossgan/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <iterator>
#include <sstream>

#include "crossgan/config.hpp"
#include "crossgan/error.hpp"
#include "crossgan/rng.hpp"

namespace crossgan {
namespace fs = std::filesystem;
namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

}  // namespace

std::string to_string(Domain d) { return d == Domain::kS ? "S" : "L"; }

Domain parse_domain(const std::string& text) {
  if (text == "S" || text == "s" || text == "0") return Domain::kS;
  if (text == "L" || text == "l" || text == "1") return Domain::kL;
  throw ConfigError("unknown domain '" + text + "' (expected S or L)");
}

// ---------------------------------------------------------------- Corpus

Corpus::Corpus(std::vector<FrameRecord> records) : records_(std::move(records)) {
  std::map<std::string, Domain> episode_domain;
  std::set<std::pair<std::string, int>> positions;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!index_.emplace(r.frame_id, i).second) {
      throw ConfigError("duplicate frame id " + std::to_string(r.frame_id));
    }
    if (r.frame_index < 0) throw ConfigError("negative frame index in " + r.episode_id);
    if (!positions.emplace(r.episode_id, r.frame_index).second) {
      throw ConfigError("duplicate frame index " + std::to_string(r.frame_index) +
                        " in episode " + r.episode_id);
    }
    auto [it, inserted] = episode_domain.emplace(r.episode_id, r.domain);
    if (!inserted && it->second != r.domain) {
      throw ConfigError("episode " + r.episode_id + " spans two domains");
    }
    domains_.insert(r.domain);
  }
  std::map<std::string, std::vector<std::pair<int, FrameId>>> grouped;
  for (const auto& r : records_) grouped[r.episode_id].emplace_back(r.frame_index, r.frame_id);
  for (auto& [ep, frames] : grouped) {
    std::sort(frames.begin(), frames.end());
    auto& ids = episodes_[ep];
    for (const auto& [_, id] : frames) ids.push_back(id);
  }
}

const FrameRecord& Corpus::find(FrameId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ConfigError("unknown frame id " + std::to_string(id));
  return records_[it->second];
}

std::vector<FrameId> Corpus::ids(std::optional<Domain> domain) const {
  std::vector<FrameId> out;
  for (const auto& r : records_) {
    if (!domain || r.domain == *domain) out.push_back(r.frame_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Domain Corpus::episode_domain(const std::string& episode_id) const {
  auto it = episodes_.find(episode_id);
  if (it == episodes_.end()) throw ConfigError("unknown episode " + episode_id);
  return find(it->second.front()).domain;
}

// ------------------------------------------------------------------ scan

ScanResult scan_corpus(const fs::path& root, const DomainMap& domain_map) {
  if (!fs::is_directory(root)) throw ConfigError("corpus root does not exist: " + root.string());
  if (domain_map.empty()) throw ConfigError("domain map is empty");

  // Domain order first (S before L), then directory name.
  std::vector<std::pair<Domain, std::string>> dirs;
  for (const auto& [dir, domain] : domain_map) dirs.emplace_back(domain, dir);
  std::sort(dirs.begin(), dirs.end());

  ScanResult result;
  std::vector<FrameRecord> records;
  for (const auto& [domain, dir] : dirs) {
    const fs::path domain_root = root / dir;
    if (!fs::is_directory(domain_root)) {
      throw ConfigError("domain directory does not exist: " + domain_root.string());
    }
    std::size_t found = 0;
    for (const auto& episode_dir : sorted_entries(domain_root, true)) {
      const std::string episode_id = dir + "/" + episode_dir.filename().string();
      int frame_index = 0;
      for (const auto& file : sorted_entries(episode_dir, false)) {
        if (!has_image_extension(file)) continue;
        if (!is_readable_image(file)) {
          ++result.skipped;
          result.warnings.push_back("unreadable image skipped: " + file.string());
          continue;
        }
        FrameRecord r;
        r.frame_id = static_cast<FrameId>(records.size());
        r.domain = domain;
        r.episode_id = episode_id;
        r.frame_index = frame_index++;
        r.path = file;
        records.push_back(std::move(r));
        ++found;
      }
    }
    if (found == 0) {
      throw ConfigError("domain directory holds no readable images: " + domain_root.string());
    }
  }
  if (records.empty()) throw ConfigError("empty corpus under " + root.string());
  result.corpus = Corpus(std::move(records));
  return result;
}

void write_manifest(const fs::path& path, const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.records()) {
    out += std::to_string(r.frame_id) + "\t" + to_string(r.domain) + "\t" + r.episode_id + "\t" +
           std::to_string(r.frame_index) + "\t" + r.path.string() + "\n";
  }
  write_text_file(path, out);
}

Corpus read_manifest(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<FrameRecord> records;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (int i = 0; i < 4; ++i) {
      const auto tab = line.find('\t', start);
      if (tab == std::string::npos) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 5 columns");
      }
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    cols.push_back(line.substr(start));
    FrameRecord r;
    r.frame_id = parse_int(cols[0], "frame_id");
    r.domain = parse_domain(cols[1]);
    r.episode_id = cols[2];
    r.frame_index = static_cast<int>(parse_int(cols[3], "frame_index"));
    r.path = cols[4];
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ConfigError("empty manifest: " + path.string());
  return Corpus(std::move(records));
}

// ------------------------------------------------------------- batching

ImageBatch load_batch(const Corpus& corpus, const std::vector<FrameId>& ids, int resolution,
                      bool allow_any_resolution) {
  const bool supported = std::find(std::begin(kSupportedResolutions), std::end(kSupportedResolutions),
                                   resolution) != std::end(kSupportedResolutions);
  if (!supported && !(allow_any_resolution && resolution >= 4)) {
    throw ConfigError("unsupported resolution " + std::to_string(resolution) +
                      " (expected 64, 128 or 256)");
  }
  const std::size_t res = static_cast<std::size_t>(resolution);
  ImageBatch batch;
  batch.data = Tensor<float>({ids.size(), 3, res, res});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const FrameRecord& r = corpus.find(ids[i]);
    const RgbImage img = resize_bilinear(read_image(r.path), resolution, resolution);
    normalize_into(img, batch.data.row(i).data());
    batch.domains.push_back(r.domain);
    batch.frame_ids.push_back(r.frame_id);
  }
  return batch;
}

MinibatchStream::MinibatchStream(const Corpus& corpus, std::size_t batch_size,
                                 std::optional<Domain> filter, std::uint64_t seed)
    : corpus_(&corpus), pool_(corpus.ids(filter)), batch_size_(batch_size), seed_(seed) {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (pool_.empty()) throw ConfigError("no frames match the domain filter");
  if (batch_size > pool_.size()) {
    throw ConfigError("batch size " + std::to_string(batch_size) + " exceeds the " +
                      std::to_string(pool_.size()) + " available frames");
  }
  batches_per_epoch_ = pool_.size() / batch_size;
}

std::vector<FrameId> MinibatchStream::epoch_order(std::uint64_t epoch) const {
  if (epoch == cached_epoch_) return cached_order_;
  std::vector<FrameId> order = pool_;
  Rng rng(derive_seed(seed_, epoch));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  cached_epoch_ = epoch;
  cached_order_ = order;
  return order;
}

std::vector<FrameId> MinibatchStream::batch_ids(std::uint64_t index) const {
  const std::uint64_t epoch = index / batches_per_epoch_;
  const std::size_t within = index % batches_per_epoch_;
  const auto order = epoch_order(epoch);
  return {order.begin() + within * batch_size_, order.begin() + (within + 1) * batch_size_};
}

ImageBatch MinibatchStream::next(int resolution, bool allow_any_resolution) {
  return load_batch(*corpus_, next_ids(), resolution, allow_any_resolution);
}

// ------------------------------------------------------------ synthetic

namespace {

constexpr Rgb kWarm[] = {{236, 196, 64}, {248, 128, 40}, {206, 64, 44}, {255, 222, 128},
                         {180, 96, 48}};
constexpr Rgb kCool[] = {{56, 108, 204}, {40, 168, 160}, {92, 72, 184}, {150, 200, 232},
                         {36, 64, 120}};

RgbImage synth_frame(Domain domain, int resolution, Rng& rng) {
  const Rgb* palette = domain == Domain::kS ? kWarm : kCool;
  const std::size_t n = std::size(kWarm);
  RgbImage img(resolution, resolution);
  const Rgb bg = palette[rng.below(n)];
  fill_rectangle(img, 0, 0, resolution - 1, resolution - 1, bg);
  const int shapes = 3 + static_cast<int>(rng.below(4));
  for (int s = 0; s < shapes; ++s) {
    const Rgb c = palette[rng.below(n)];
    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(resolution)));
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(resolution)));
    const int w = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(resolution / 2)));
    const int h = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(resolution / 2)));
    if (rng.below(2) == 0) {
      fill_rectangle(img, x - w / 2, y - h / 2, x + w / 2, y + h / 2, c);
    } else {
      fill_ellipse(img, x, y, w / 2, h / 2, static_cast<double>(rng.below(180)), c);
    }
  }
  return img;
}

}  // namespace

Corpus synth_corpus(const fs::path& root, int episodes_per_domain, int frames_per_episode,
                    int resolution, std::uint64_t seed) {
  if (episodes_per_domain < 1 || frames_per_episode < 1 || resolution < 4) {
    throw ConfigError("synth_corpus: counts must be >= 1 and resolution >= 4");
  }
  char name[32];
  for (Domain d : {Domain::kS, Domain::kL}) {
    for (int e = 0; e < episodes_per_domain; ++e) {
      std::snprintf(name, sizeof name, "ep%03d", e);
      const fs::path dir = root / to_string(d) / name;
      fs::create_directories(dir);
      for (int f = 0; f < frames_per_episode; ++f) {
        const std::uint64_t stream =
            (static_cast<std::uint64_t>(domain_index(d)) << 40) |
            (static_cast<std::uint64_t>(e) << 20) | static_cast<std::uint64_t>(f);
        Rng rng(derive_seed(seed, stream));
        std::snprintf(name, sizeof name, "f%04d.png", f);
        write_png(dir / name, synth_frame(d, resolution, rng));
      }
    }
  }
  return scan_corpus(root, {{"S", Domain::kS}, {"L", Domain::kL}}).corpus;
}

}  // namespace crossgan
