#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crossgan/checkpoint.hpp"
#include "crossgan/config.hpp"
#include "crossgan/corpus.hpp"
#include "crossgan/embed.hpp"
#include "crossgan/error.hpp"
#include "crossgan/image.hpp"
#include "crossgan/toy.hpp"
#include "crossgan/train.hpp"

namespace crossgan::cli {
namespace fs = std::filesystem;
namespace {

std::optional<Domain> optional_domain(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_domain(text);
}

std::vector<RgbImage> tiles_of(const Tensor<float>& batch) {
  std::vector<RgbImage> out;
  for (std::size_t i = 0; i < batch.dim(0); ++i) out.push_back(batch_item(batch, i));
  return out;
}

int square_side(int m) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (m < 1 || m > 256 || side * side != m) {
    throw ConfigError("grid size must be a perfect square in [1, 256], got " + std::to_string(m));
  }
  return side;
}

RgbImage load_frame(const Corpus& corpus, FrameId id, int resolution) {
  const auto batch = load_batch(corpus, {id}, resolution, true);
  return batch_item(batch.data, 0);
}

Tensor<float> image_as_batch(const fs::path& path, int resolution) {
  const RgbImage img = resize_bilinear(read_image(path), resolution, resolution);
  Tensor<float> t({1, 3, static_cast<std::size_t>(resolution), static_cast<std::size_t>(resolution)});
  normalize_into(img, t.data());
  return t;
}

void print_counts(const Corpus& corpus, std::size_t skipped) {
  std::map<Domain, std::size_t> per_domain;
  for (const auto& r : corpus.records()) ++per_domain[r.domain];
  for (const auto& [d, n] : per_domain) std::cout << "domain\t" << to_string(d) << '\t' << n << '\n';
  for (const auto& [id, frames] : corpus.episodes()) {
    std::cout << "episode\t" << id << '\t' << frames.size() << '\n';
  }
  std::cout << "frames\t" << corpus.size() << '\n';
  std::cout << "skipped\t" << skipped << '\n';
}

/// Loads <dir>/<source> when present (checking the fingerprint), otherwise
/// builds the index from the corpus and stores it there.
EmbeddingIndex cached_index(const Checkpoint& ckpt, Model& model, const Corpus& corpus,
                            EmbeddingSource source, const fs::path& dir, std::size_t batch) {
  const fs::path sub = dir / to_string(source);
  const std::string fp = fingerprint(ckpt.params);
  if (fs::exists(sub / "manifest.txt")) {
    auto index = load_index(sub);
    if (index.fingerprint() != fp) {
      throw ConfigError("index " + sub.string() + " was built from checkpoint fingerprint " +
                        index.fingerprint() + " but the checkpoint has fingerprint " + fp);
    }
    if (index.size() != corpus.size()) {
      throw ConfigError("index " + sub.string() + " holds " + std::to_string(index.size()) +
                        " frames but the corpus has " + std::to_string(corpus.size()));
    }
    return index;
  }
  std::cerr << "building " << to_string(source) << " index in " << sub << '\n';
  auto index = build_index(model, fp, corpus, source, model.spec().generator.resolution, batch, true);
  save_index(sub, index);
  return index;
}

// ---------------------------------------------------------------- train

const std::map<std::string, std::string>& train_help() {
  static const std::map<std::string, std::string> help{
      {"regime", "single, combined, cogan, dann or toy"},
      {"domain", "domain trained by the single regime (S or L)"},
      {"resolution", "image side length (64, 128 or 256)"},
      {"z_dim", "prior dimension"},
      {"generator_channels", "channels of the last generator block"},
      {"discriminator_channels", "channels of the first discriminator block"},
      {"classifier_width", "hidden width of the domain classifier"},
      {"batch_size", "minibatch size (per domain for cogan and dann)"},
      {"learning_rate", "step size"},
      {"optimizer", "sgd or adam"},
      {"beta1", "adam first-moment decay"},
      {"beta2", "adam second-moment decay"},
      {"iterations", "number of training iterations"},
      {"non_saturating", "non-saturating generator objective (true/false)"},
      {"variant", "domain-adaptation variant"},
      {"lazy_warmup", "iterations before fake classifier training (-1: one epoch)"},
      {"seed", "master seed"},
      {"checkpoint_every", "checkpoint cadence in iterations (0: once per epoch)"},
      {"sample_every", "sample-grid cadence in iterations (0: once per epoch)"},
      {"keep_last", "most recent checkpoints kept besides per-epoch ones"},
      {"sample_count", "images in each sample grid"},
      {"allow_any_resolution", "admit resolutions other than 64/128/256"},
  };
  return help;
}

struct TrainOptions {
  std::string config_file;
  std::string corpus;
  std::string run;
  std::string resume;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> flags;
};

void run_toy(const TrainConfig& c, const fs::path& run_dir) {
  ToyConfig toy;
  toy.steps = static_cast<int>(c.iterations);
  toy.batch_size = c.batch_size;
  toy.z_dim = c.z_dim;
  toy.learning_rate = c.learning_rate;
  toy.beta1 = c.beta1;
  toy.beta2 = c.beta2;
  toy.seed = c.seed;
  fs::create_directories(run_dir);
  KeyValues kv = c.to_key_values();
  kv["toy.hidden"] = std::to_string(toy.hidden);
  kv["toy.modes"] = std::to_string(toy.data.modes);
  kv["toy.radius"] = format_double(toy.data.radius);
  kv["toy.stddev"] = format_double(toy.data.stddev);
  write_key_values(run_dir / "config.txt", kv);

  const auto result = train_toy(toy);
  std::ostringstream points;
  for (std::size_t i = 0; i < result.samples.dim(0); ++i) {
    points << format_double(result.samples.row(i)[0]) << '\t' << format_double(result.samples.row(i)[1]) << '\n';
  }
  write_text_file(run_dir / "samples.tsv", points.str());
  std::ostringstream report;
  for (std::size_t k = 0; k < result.coverage.counts.size(); ++k) {
    report << "mode\t" << k << '\t' << result.coverage.counts[k] << '\n';
  }
  report << "covered\t" << result.coverage.covered << '\n';
  write_text_file(run_dir / "coverage.tsv", report.str());
  std::cout << report.str();
}

}  // namespace

void add_ingest(CLI::App& app) {
  struct Options {
    std::string root, out;
    std::vector<std::string> map{"S=S", "L=L"};
  };
  auto o = std::make_shared<Options>();
  auto* cmd = app.add_subcommand("ingest", "Scan a corpus directory and write a manifest");
  cmd->add_option("--root", o->root, "corpus root")->required();
  cmd->add_option("--map", o->map, "subdirectory=domain pairs")->capture_default_str();
  cmd->add_option("--out", o->out, "manifest path")->required();
  cmd->callback([o] {
    DomainMap dm;
    for (const auto& item : o->map) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("--map expects dir=domain, got '" + item + "'");
      dm[item.substr(0, eq)] = parse_domain(item.substr(eq + 1));
    }
    const auto result = scan_corpus(o->root, dm);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    write_manifest(o->out, result.corpus);
    print_counts(result.corpus, result.skipped);
  });
}

void add_synth(CLI::App& app) {
  struct Options {
    std::string out, manifest;
    int episodes = 3, frames = 8, resolution = 64;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Options>();
  auto* cmd = app.add_subcommand("synth", "Write a two-palette synthetic corpus");
  cmd->add_option("--out", o->out, "corpus root")->required();
  cmd->add_option("--episodes", o->episodes, "episodes per domain")->capture_default_str();
  cmd->add_option("--frames", o->frames, "frames per episode")->capture_default_str();
  cmd->add_option("--resolution", o->resolution, "image side length")->capture_default_str();
  cmd->add_option("--seed", o->seed, "seed")->capture_default_str();
  cmd->add_option("--manifest", o->manifest, "manifest path (default <out>/manifest.tsv)");
  cmd->callback([o] {
    if (o->episodes < 1 || o->frames < 1 || o->resolution < 4) {
      throw ConfigError("episodes and frames must be positive and resolution at least 4");
    }
    const auto corpus = synth_corpus(o->out, o->episodes, o->frames, o->resolution, o->seed);
    write_manifest(o->manifest.empty() ? fs::path(o->out) / "manifest.tsv" : fs::path(o->manifest), corpus);
    print_counts(corpus, 0);
  });
}

void add_train(CLI::App& app) {
  auto o = std::make_shared<TrainOptions>();
  auto* cmd = app.add_subcommand("train", "Train a model; flags mirror the configuration keys");
  cmd->add_option("--config", o->config_file, "key=value configuration file (flags override it)");
  cmd->add_option("--corpus", o->corpus, "corpus manifest");
  cmd->add_option("--run", o->run, "run directory")->required();
  cmd->add_option("--resume", o->resume, "checkpoint directory to continue from");
  for (const auto& [key, help] : train_help()) {
    o->flags[key] = cmd->add_option("--" + key, o->values[key], help);
  }
  cmd->callback([o] {
    KeyValues kv;
    if (!o->resume.empty()) {
      for (const auto& [k, v] : load_checkpoint(o->resume).manifest) {
        if (k.starts_with("config.")) kv[k.substr(7)] = v;
      }
    }
    if (!o->config_file.empty()) {
      for (const auto& [k, v] : read_key_values(o->config_file)) kv[k] = v;
    }
    for (const auto& [key, opt] : o->flags) {
      if (opt->count() > 0) kv[key] = o->values.at(key);
    }
    const TrainConfig config = TrainConfig::from_key_values(kv);
    const fs::path run_dir = o->run;
    if (config.regime == Regime::kToy) {
      run_toy(config, run_dir);
      return;
    }
    if (o->corpus.empty()) throw ConfigError("--corpus is required for regime " + to_string(config.regime));
    config.validate();
    const Corpus corpus = read_manifest(o->corpus);
    std::optional<fs::path> resume;
    if (!o->resume.empty()) resume = fs::path(o->resume);
    const auto result = train(config, corpus, run_dir, resume,
                              [](const std::string& line) { std::cerr << line << '\n'; });
    std::cout << "checkpoint\t" << result.final_checkpoint.string() << '\n';
    std::cout << "iterations\t" << result.iterations << '\n';
    std::cout << "dump_z\t" << result.dump_z_hash << '\n';
  });
}

void add_generate(CLI::App& app) {
  struct Options {
    std::string checkpoint, out, domain;
    int count = 16;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Options>();
  auto* cmd = app.add_subcommand("generate", "Write individual generated frames");
  cmd->add_option("--checkpoint", o->checkpoint, "checkpoint directory")->required();
  cmd->add_option("--out", o->out, "output directory")->required();
  cmd->add_option("--count", o->count, "number of frames")->capture_default_str();
  cmd->add_option("--seed", o->seed, "prior seed")->capture_default_str();
  cmd->add_option("--domain", o->domain, "generator domain (S or L) for two-domain models");
  cmd->callback([o] {
    if (o->count < 1) throw ConfigError("--count must be positive");
    const auto ckpt = load_checkpoint(o->checkpoint);
    Model model = load_model(ckpt);
    const auto z = seeded_z(static_cast<std::size_t>(o->count), model.spec().generator.z_dim, o->seed);
    const auto batch = sample(model, z, optional_domain(o->domain));
    fs::create_directories(o->out);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04zu.png", i);
      write_png(fs::path(o->out) / name, batch_item(batch.data, i));
    }
    std::cout << "frames\t" << batch.size() << '\n';
    if (batch.size() >= 2) std::cout << "diversity\t" << format_double(diversity_score(batch)) << '\n';
  });
}

void add_grid(CLI::App& app) {
  struct Options {
    std::string checkpoint, out, domain;
    int count = 64;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Options>();
  auto* cmd = app.add_subcommand("grid", "Render a square grid of generated frames");
  cmd->add_option("--checkpoint", o->checkpoint, "checkpoint directory")->required();
  cmd->add_option("--out", o->out, "PNG path")->required();
  cmd->add_option("--count", o->count, "perfect square <= 256")->capture_default_str();
  cmd->add_option("--seed", o->seed, "prior seed")->capture_default_str();
  cmd->add_option("--domain", o->domain, "S or L; two-domain models default to both side by side");
  cmd->callback([o] {
    const int side = square_side(o->count);
    const auto ckpt = load_checkpoint(o->checkpoint);
    Model model = load_model(ckpt);
    const auto z = seeded_z(static_cast<std::size_t>(o->count), model.spec().generator.z_dim, o->seed);
    auto grid_for = [&](std::optional<Domain> d) {
      return tile_images(tiles_of(sample(model, z, d).data), side);
    };
    const auto domain = optional_domain(o->domain);
    const RgbImage out = two_domain(model.spec().regime) && !domain
                             ? tile_images({grid_for(Domain::kS), grid_for(Domain::kL)}, 2, 8, 128)
                             : grid_for(domain);
    write_png(o->out, out);
    std::cout << "grid\t" << out.width << "x" << out.height << '\n';
  });
}

void add_paired(CLI::App& app) {
  struct Options {
    std::string checkpoint, out;
    int count = 8;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Options>();
  auto* cmd = app.add_subcommand("paired", "Same-z frames from both coupled generators");
  cmd->add_option("--checkpoint", o->checkpoint, "cogan checkpoint directory")->required();
  cmd->add_option("--out", o->out, "PNG path (S row above L row)")->required();
  cmd->add_option("--count", o->count, "pairs")->capture_default_str();
  cmd->add_option("--seed", o->seed, "prior seed")->capture_default_str();
  cmd->callback([o] {
    if (o->count < 1 || o->count > 256) throw ConfigError("--count must be in [1, 256]");
    const auto ckpt = load_checkpoint(o->checkpoint);
    const int z_dim = static_cast<int>(require_int(ckpt.manifest, "model.z_dim"));
    const auto z = seeded_z(static_cast<std::size_t>(o->count), z_dim, o->seed);
    const auto [s, l] = sample_paired(ckpt, z);
    auto tiles = tiles_of(s.data);
    for (auto& t : tiles_of(l.data)) tiles.push_back(std::move(t));
    write_png(o->out, tile_images(tiles, o->count, 2, 255));
    std::cout << "pairs\t" << o->count << '\n';
  });
}

void add_knn_panel(CLI::App& app) {
  struct Options {
    std::string checkpoint, corpus, index, image, domain = "S", out;
    std::uint64_t z_seed = 1;
    std::size_t k = 10, batch = 32;
  };
  auto o = std::make_shared<Options>();
  auto* cmd = app.add_subcommand("knn-panel", "Nearest training frames of a query frame");
  cmd->add_option("--checkpoint", o->checkpoint, "checkpoint directory")->required();
  cmd->add_option("--corpus", o->corpus, "corpus manifest")->required();
  cmd->add_option("--index", o->index, "index directory (built on first use)")->required();
  auto* seed_opt = cmd->add_option("--z-seed", o->z_seed, "query is the frame generated from this seed");
  auto* image_opt = cmd->add_option("--image", o->image, "query image file");
  seed_opt->excludes(image_opt);
  cmd->add_option("--domain", o->domain, "query generator/discriminator domain")->capture_default_str();
  cmd->add_option("--k", o->k, "neighbors per row")->capture_default_str();
  cmd->add_option("--batch", o->batch, "embedding batch size")->capture_default_str();
  cmd->add_option("--out", o->out, "PNG path")->required();
  cmd->callback([o] {
    if (o->k < 1) throw ConfigError("--k must be at least 1");
    const auto ckpt = load_checkpoint(o->checkpoint);
    Model model = load_model(ckpt);
    const Corpus corpus = read_manifest(o->corpus);
    const int res = model.spec().generator.resolution;
    const Domain domain = parse_domain(o->domain);

    Tensor<float> query;
    if (!o->image.empty()) {
      query = image_as_batch(o->image, res);
    } else {
      const auto z = seeded_z(1, model.spec().generator.z_dim, o->z_seed);
      query = sample(model, z, two_domain(model.spec().regime) ? std::optional(domain) : std::nullopt).data;
    }

    struct Row {
      EmbeddingSource source;
      std::optional<Domain> domain;
    };
    std::vector<Row> rows;
    if (model.has_classifier()) {
      for (auto src : {EmbeddingSource::kDiscriminator, EmbeddingSource::kClassifier}) {
        for (Domain d : {Domain::kS, Domain::kL}) rows.push_back({src, d});
      }
    } else {
      rows.push_back({EmbeddingSource::kDiscriminator, std::nullopt});
    }

    std::vector<std::pair<int, int>> cells{{0, 0}};
    std::vector<RgbImage> tiles{batch_item(query, 0)};
    std::map<EmbeddingSource, EmbeddingIndex> indices;
    std::size_t columns = 1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto src = rows[r].source;
      if (!indices.count(src)) {
        indices[src] = cached_index(ckpt, model, corpus, src, o->index, o->batch);
      }
      const auto q = embed(model, query, src, domain);
      const auto hits = knn(indices[src], q.row(0), o->k, rows[r].domain);
      for (std::size_t j = 0; j < hits.size(); ++j) {
        cells.emplace_back(static_cast<int>(r), static_cast<int>(j + 1));
        tiles.push_back(load_frame(corpus, hits[j].frame_id, res));
        std::cout << to_string(src) << '\t' << (rows[r].domain ? to_string(*rows[r].domain) : "all") << '\t'
                  << j + 1 << '\t' << hits[j].frame_id << '\t' << format_double(hits[j].distance) << '\n';
      }
      columns = std::max(columns, hits.size() + 1);
    }
    write_png(o->out, place_tiles(cells, tiles, static_cast<int>(rows.size()), static_cast<int>(columns), 2, 255));
    std::cout << "tiles\t" << tiles.size() << '\n';
  });
}

void add_retrieve(CLI::App& app) {
  struct Options {
    std::string checkpoint, corpus, index, episode, domain, source = "discriminator",
        aggregate = "min", out;
    std::size_t top = 10, batch = 32;
  };
  auto o = std::make_shared<Options>();
  auto* cmd = app.add_subcommand("retrieve", "Rank episodes by bag-of-frames distance to a query episode");
  cmd->add_option("--checkpoint", o->checkpoint, "checkpoint directory")->required();
  cmd->add_option("--corpus", o->corpus, "corpus manifest")->required();
  cmd->add_option("--index", o->index, "index directory (built on first use)")->required();
  cmd->add_option("--episode", o->episode, "query episode id")->required();
  cmd->add_option("--domain", o->domain, "only rank episodes of this domain (S or L)");
  cmd->add_option("--top", o->top, "episodes reported")->capture_default_str();
  cmd->add_option("--source", o->source, "discriminator or classifier")->capture_default_str();
  cmd->add_option("--aggregate", o->aggregate, "min or mean of the matched pair distances")
      ->capture_default_str();
  cmd->add_option("--batch", o->batch, "embedding batch size")->capture_default_str();
  cmd->add_option("--out", o->out, "matched-frame strip PNG for the top hit");
  cmd->callback([o] {
    PairAggregate agg;
    if (o->aggregate == "min") agg = PairAggregate::kMinimum;
    else if (o->aggregate == "mean") agg = PairAggregate::kMean;
    else throw ConfigError("--aggregate must be min or mean, got '" + o->aggregate + "'");
    const auto ckpt = load_checkpoint(o->checkpoint);
    Model model = load_model(ckpt);
    const Corpus corpus = read_manifest(o->corpus);
    const auto index = cached_index(ckpt, model, corpus, parse_source(o->source), o->index, o->batch);
    const auto bags = episode_bags(index, corpus);

    const auto query = std::find_if(bags.begin(), bags.end(),
                                     [&](const EpisodeBag& b) { return b.episode_id == o->episode; });
    if (query == bags.end()) {
      std::string available;
      for (const auto& b : bags) available += (available.empty() ? "" : ", ") + b.episode_id;
      throw ConfigError("unknown episode '" + o->episode + "'; available: " + available);
    }
    const auto filter = optional_domain(o->domain);
    std::vector<EpisodeBag> candidates;
    for (const auto& b : bags) {
      if (!filter || b.domain == *filter) candidates.push_back(b);
    }
    if (candidates.empty()) throw ConfigError("no candidate episodes in domain " + o->domain);
    const auto result = retrieve_episodes(*query, candidates, o->top, agg);
    for (std::size_t i = 0; i < result.ranking.size(); ++i) {
      std::cout << i + 1 << '\t' << result.ranking[i].episode_id << '\t'
                << format_double(result.ranking[i].distance) << '\n';
    }
    if (!o->out.empty()) {
      const auto& top = *std::find_if(candidates.begin(), candidates.end(), [&](const EpisodeBag& b) {
        return b.episode_id == result.ranking.front().episode_id;
      });
      const int res = model.spec().generator.resolution;
      const std::size_t n = std::min<std::size_t>(20, result.top_match.pairs.size());
      std::vector<RgbImage> strip(2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& p = result.top_match.pairs[i];
        strip[i] = load_frame(corpus, query->frame_ids[p.query_row], res);
        strip[n + i] = load_frame(corpus, top.frame_ids[p.candidate_row], res);
      }
      write_png(o->out, tile_images(strip, static_cast<int>(n), 2, 255));
      std::cout << "strip\t" << n << '\n';
    }
  });
}

void add_losses(CLI::App& app) {
  struct Options {
    std::string run;
    int samples = 16;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Options>();
  auto* cmd = app.add_subcommand("losses", "Summarize a run's loss log and per-checkpoint diversity");
  cmd->add_option("--run", o->run, "run directory")->required();
  cmd->add_option("--samples", o->samples, "frames per diversity estimate (0 disables)")->capture_default_str();
  cmd->add_option("--seed", o->seed, "prior seed for the diversity estimate")->capture_default_str();
  cmd->callback([o] {
    const RunLayout layout{o->run};
    struct Series {
      std::size_t count = 0;
      double first = 0, last = 0, sum = 0;
      double min = std::numeric_limits<double>::infinity();
      double max = -std::numeric_limits<double>::infinity();
    };
    std::map<std::string, Series> series;
    std::istringstream in(read_text_file(layout.loss_log()));
    std::string line;
    while (std::getline(in, line)) {
      std::vector<std::string> fields;
      std::stringstream ss(line);
      for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
      if (fields.size() < 3) continue;
      std::string key = fields[1];
      if (fields.size() > 3) key += "/" + fields[3].substr(0, fields[3].find('='));
      const double v = parse_double(fields[2], "loss value");
      auto& s = series[key];
      if (s.count++ == 0) s.first = v;
      s.last = v;
      s.sum += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    std::cout << "series\tcount\tfirst\tlast\tmean\tmin\tmax\n";
    for (const auto& [k, s] : series) {
      std::cout << k << '\t' << s.count << '\t' << format_double(s.first) << '\t' << format_double(s.last)
                << '\t' << format_double(s.sum / static_cast<double>(s.count)) << '\t'
                << format_double(s.min) << '\t' << format_double(s.max) << '\n';
    }
    if (o->samples < 2 || !fs::exists(layout.checkpoints())) return;
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(layout.checkpoints())) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    std::cout << "checkpoint\tdomain\tdiversity\n";
    for (const auto& dir : dirs) {
      const auto ckpt = load_checkpoint(dir);
      Model model = load_model(ckpt);
      const auto z = seeded_z(static_cast<std::size_t>(o->samples), model.spec().generator.z_dim, o->seed);
      std::vector<std::optional<Domain>> domains{std::nullopt};
      if (two_domain(model.spec().regime)) domains = {Domain::kS, Domain::kL};
      for (const auto& d : domains) {
        std::cout << dir.filename().string() << '\t' << (d ? to_string(*d) : "all") << '\t'
                  << format_double(diversity_score(sample(model, z, d))) << '\n';
      }
    }
  });
}

}  // namespace crossgan::cli
