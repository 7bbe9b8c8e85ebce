#include "crossgan/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "crossgan/error.hpp"
#include "crossgan/image.hpp"
#include "crossgan/objectives.hpp"

namespace crossgan {
namespace fs = std::filesystem;

// -------------------------------------------------------------- variants

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kFullDomainAdaptation: return "FullDomainAdaptation";
    case Variant::kNoClassifierTraining: return "NoClassifierTraining";
    case Variant::kNoFakeClassifierTraining: return "NoFakeClassifierTraining";
    case Variant::kNoRealClassifierTraining: return "NoRealClassifierTraining";
    case Variant::kLazyFakeClassifierTraining: return "LazyFakeClassifierTraining";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::kFullDomainAdaptation, Variant::kNoClassifierTraining,
                    Variant::kNoFakeClassifierTraining, Variant::kNoRealClassifierTraining,
                    Variant::kLazyFakeClassifierTraining}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "'");
}

VariantFlags variant_of(Variant v, std::int64_t warmup) {
  switch (v) {
    case Variant::kFullDomainAdaptation: return {true, true, 0};
    case Variant::kNoClassifierTraining: return {false, false, 0};
    case Variant::kNoFakeClassifierTraining: return {true, false, 0};
    case Variant::kNoRealClassifierTraining: return {false, true, 0};
    case Variant::kLazyFakeClassifierTraining: return {true, true, warmup};
  }
  throw ConfigError("unknown variant");
}

VariantFlags variant_of(const std::string& name, std::int64_t warmup) {
  return variant_of(parse_variant(name), warmup);
}

// ---------------------------------------------------------------- config

KeyValues TrainConfig::to_key_values() const {
  KeyValues kv;
  kv["regime"] = to_string(regime);
  kv["domain"] = to_string(domain);
  kv["resolution"] = std::to_string(resolution);
  kv["z_dim"] = std::to_string(z_dim);
  kv["generator_channels"] = std::to_string(generator_channels);
  kv["discriminator_channels"] = std::to_string(discriminator_channels);
  kv["classifier_width"] = std::to_string(classifier_width);
  kv["batch_size"] = std::to_string(batch_size);
  kv["learning_rate"] = format_double(learning_rate);
  kv["optimizer"] = optimizer == OptimizerKind::kSgd ? "sgd" : "adam";
  kv["beta1"] = format_double(beta1);
  kv["beta2"] = format_double(beta2);
  kv["iterations"] = std::to_string(iterations);
  kv["non_saturating"] = non_saturating ? "true" : "false";
  kv["variant"] = to_string(variant);
  kv["lazy_warmup"] = std::to_string(lazy_warmup);
  kv["seed"] = std::to_string(seed);
  kv["checkpoint_every"] = std::to_string(checkpoint_every);
  kv["sample_every"] = std::to_string(sample_every);
  kv["keep_last"] = std::to_string(keep_last);
  kv["sample_count"] = std::to_string(sample_count);
  kv["allow_any_resolution"] = allow_any_resolution ? "true" : "false";
  return kv;
}

TrainConfig TrainConfig::from_key_values(const KeyValues& kv) {
  TrainConfig c;
  for (const auto& [key, value] : kv) {
    auto as_int = [&] { return static_cast<int>(parse_int(value, key)); };
    if (key == "regime") c.regime = parse_regime(value);
    else if (key == "domain") c.domain = parse_domain(value);
    else if (key == "resolution") c.resolution = as_int();
    else if (key == "z_dim") c.z_dim = as_int();
    else if (key == "generator_channels") c.generator_channels = as_int();
    else if (key == "discriminator_channels") c.discriminator_channels = as_int();
    else if (key == "classifier_width") c.classifier_width = as_int();
    else if (key == "batch_size") c.batch_size = as_int();
    else if (key == "learning_rate") c.learning_rate = parse_double(value, key);
    else if (key == "optimizer") {
      if (value == "sgd") c.optimizer = OptimizerKind::kSgd;
      else if (value == "adam") c.optimizer = OptimizerKind::kAdam;
      else throw ConfigError("optimizer must be sgd or adam, got '" + value + "'");
    }
    else if (key == "beta1") c.beta1 = parse_double(value, key);
    else if (key == "beta2") c.beta2 = parse_double(value, key);
    else if (key == "iterations") c.iterations = parse_int(value, key);
    else if (key == "non_saturating") c.non_saturating = parse_bool(value, key);
    else if (key == "variant") c.variant = parse_variant(value);
    else if (key == "lazy_warmup") c.lazy_warmup = parse_int(value, key);
    else if (key == "seed") c.seed = parse_uint(value, key);
    else if (key == "checkpoint_every") c.checkpoint_every = parse_int(value, key);
    else if (key == "sample_every") c.sample_every = parse_int(value, key);
    else if (key == "keep_last") c.keep_last = as_int();
    else if (key == "sample_count") c.sample_count = as_int();
    else if (key == "allow_any_resolution") c.allow_any_resolution = parse_bool(value, key);
    else throw ConfigError("unknown configuration key '" + key + "'");
  }
  return c;
}

void TrainConfig::validate() const {
  if (regime == Regime::kToy) throw ConfigError("the toy regime is configured with ToyConfig");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  const bool supported = std::find(std::begin(kSupportedResolutions), std::end(kSupportedResolutions),
                                   resolution) != std::end(kSupportedResolutions);
  if (!supported && !allow_any_resolution) {
    throw ConfigError("unsupported resolution " + std::to_string(resolution) +
                      " (expected 64, 128 or 256)");
  }
  if (z_dim < 1 || generator_channels < 1 || discriminator_channels < 1 || classifier_width < 1) {
    throw ConfigError("z_dim, channel counts and classifier_width must be positive");
  }
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  }
  if (checkpoint_every < 0 || sample_every < 0) throw ConfigError("cadences must be >= 0");
  if (keep_last < 1) throw ConfigError("keep_last must be at least 1");
  if (sample_count < 1 || sample_count > 256) throw ConfigError("sample_count must be in [1, 256]");
  if (lazy_warmup < -1) throw ConfigError("lazy_warmup must be >= -1");
  model_spec().generator.validate();
  model_spec().discriminator.validate();
}

ModelSpec TrainConfig::model_spec() const {
  ModelSpec s;
  s.regime = regime;
  s.generator = {z_dim, resolution, generator_channels};
  s.discriminator = {resolution, discriminator_channels};
  s.classifier_width = classifier_width;
  return s;
}

OptimizerConfig TrainConfig::optimizer_config() const {
  OptimizerConfig o;
  o.kind = optimizer;
  o.learning_rate = learning_rate;
  o.beta1 = beta1;
  o.beta2 = beta2;
  return o;
}

std::uint64_t stream_seed(const TrainConfig& c, Stream s) {
  return derive_seed(c.seed, static_cast<std::uint64_t>(s));
}

// --------------------------------------------------------------- trainer

namespace {

constexpr const char* kConfigPrefix = "config.";

LossReport merge_domains(LossKind kind, const LossReport& s, const LossReport& l) {
  LossReport r;
  r.name = kind;
  r.value = s.value + l.value;
  for (const auto& [k, v] : s.breakdown) r.breakdown.emplace_back(k + "_s", v);
  for (const auto& [k, v] : l.breakdown) r.breakdown.emplace_back(k + "_l", v);
  r.batch_size = s.batch_size + l.batch_size;
  r.clamped = s.clamped + l.clamped;
  return r;
}

LossReport relabel(LossReport r, const std::string& term) {
  r.breakdown = {{term, r.value}};
  return r;
}

}  // namespace

Trainer::Trainer(TrainConfig config, const Corpus* corpus)
    : Trainer(config, corpus, Model::initialize(config.model_spec(), stream_seed(config, Stream::kInit))) {}

Trainer::Trainer(TrainConfig config, const Corpus* corpus, Model model)
    : config_(std::move(config)),
      corpus_(corpus),
      model_(std::make_unique<Model>(std::move(model))),
      z_rng_(stream_seed(config_, Stream::kZ)) {
  setup();
}

void Trainer::setup() {
  if (!std::isfinite(config_.learning_rate) || config_.learning_rate < 0.0) {
    throw ConfigError("learning_rate must be finite and non-negative");
  }
  const auto oc = config_.optimizer_config();
  switch (config_.regime) {
    case Regime::kSingle:
    case Regime::kCombined:
      optimizers_["discriminator"] = Optimizer(oc, {"D/"});
      optimizers_["generator"] = Optimizer(oc, {"G/"});
      break;
    case Regime::kCogan:
      optimizers_["discriminator"] = Optimizer(oc, {"Ds/", "Dl/"});
      optimizers_["generator"] = Optimizer(oc, {"Gs/", "Gl/"});
      break;
    case Regime::kDann:
      optimizers_["discriminator"] = Optimizer(oc, {kGroupTrunk, kGroupRealness});
      optimizers_["generator_s"] = Optimizer(oc, {kGroupGs});
      optimizers_["generator_l"] = Optimizer(oc, {kGroupGl});
      optimizers_["classifier"] = Optimizer(oc, {kGroupTrunk, kGroupClassifier});
      break;
    case Regime::kToy:
      throw ConfigError("the toy regime is trained with train_toy");
  }

  if (corpus_) {
    const auto b = static_cast<std::size_t>(config_.batch_size);
    const std::uint64_t data = stream_seed(config_, Stream::kData);
    auto need = [&](Domain d) {
      if (!corpus_->domains_present().count(d)) {
        throw ConfigError("regime " + to_string(config_.regime) + " needs frames of domain " +
                          to_string(d));
      }
    };
    switch (config_.regime) {
      case Regime::kSingle:
        need(config_.domain);
        streams_.push_back(std::make_unique<MinibatchStream>(*corpus_, b, config_.domain, data));
        break;
      case Regime::kCombined:
        need(Domain::kS);
        need(Domain::kL);
        streams_.push_back(std::make_unique<MinibatchStream>(*corpus_, b, std::nullopt, data));
        break;
      default:
        need(Domain::kS);
        need(Domain::kL);
        streams_.push_back(
            std::make_unique<MinibatchStream>(*corpus_, b, Domain::kS, derive_seed(data, 0)));
        streams_.push_back(
            std::make_unique<MinibatchStream>(*corpus_, b, Domain::kL, derive_seed(data, 1)));
        break;
    }
    epoch_length_ = static_cast<std::int64_t>(streams_.front()->batches_per_epoch());
    for (const auto& s : streams_) {
      epoch_length_ = std::min(epoch_length_, static_cast<std::int64_t>(s->batches_per_epoch()));
    }
  }
  flags_ = variant_of(config_.variant, config_.lazy_warmup < 0 ? epoch_length_ : config_.lazy_warmup);
}

void Trainer::apply(const std::string& optimizer, const std::string& phase) {
  auto& opt = optimizers_.at(optimizer);
  opt.step(model_->params());
  if (hooks_.on_write) hooks_.on_write(phase, opt.prefixes());
}

void Trainer::guard(const LossReport& r) const {
  if (!std::isfinite(r.value)) {
    throw NumericalError("non-finite " + to_string(r.name) + " loss at iteration " +
                             std::to_string(iteration_),
                         iteration_);
  }
}

std::vector<LossReport> Trainer::gan_step(const Tensor<float>& real, const Tensor<float>& z) {
  if (config_.regime != Regime::kSingle && config_.regime != Regime::kCombined) {
    throw ConfigError("gan_step needs the single or combined regime");
  }
  if (real.dim(0) != z.dim(0)) throw ConfigError("real and z batch sizes differ");
  auto& g = model_->generator(config_.domain);
  auto& d = model_->discriminator(config_.domain);
  auto& params = model_->params();

  params.zero_grad();
  auto disc = discriminator_gradients(g, d, real, z);
  guard(disc);
  apply("discriminator", "discriminator");

  params.zero_grad();
  auto gen = generator_gradients(g, d, z, config_.non_saturating);
  guard(gen);
  apply("generator", "generator");
  ++iteration_;
  return {disc, gen};
}

std::vector<LossReport> Trainer::cogan_step(const Tensor<float>& real_s, const Tensor<float>& real_l,
                                            const Tensor<float>& z_s, const Tensor<float>& z_l) {
  if (config_.regime != Regime::kCogan) throw ConfigError("cogan_step needs the cogan regime");
  if (real_s.dim(0) != z_s.dim(0) || real_l.dim(0) != z_l.dim(0)) {
    throw ConfigError("real and z batch sizes differ");
  }
  auto& m = *model_;
  m.params().zero_grad();
  auto ds = discriminator_gradients(m.generator(Domain::kS), m.discriminator(Domain::kS), real_s, z_s);
  auto dl = discriminator_gradients(m.generator(Domain::kL), m.discriminator(Domain::kL), real_l, z_l);
  auto disc = merge_domains(LossKind::kL, ds, dl);
  guard(disc);
  apply("discriminator", "discriminator");

  m.params().zero_grad();
  auto gs = generator_gradients(m.generator(Domain::kS), m.discriminator(Domain::kS), z_s,
                                config_.non_saturating);
  auto gl = generator_gradients(m.generator(Domain::kL), m.discriminator(Domain::kL), z_l,
                                config_.non_saturating);
  auto gen = merge_domains(LossKind::kL, gs, gl);
  guard(gen);
  apply("generator", "generator");
  ++iteration_;
  return {disc, gen};
}

std::map<std::string, Tensor<float>> Trainer::cogan_generator_gradient(Domain d,
                                                                       const Tensor<float>& z) {
  if (config_.regime != Regime::kCogan) throw ConfigError("needs the cogan regime");
  auto& m = *model_;
  m.params().zero_grad();
  generator_gradients(m.generator(d), m.discriminator(d), z, config_.non_saturating,
                      Mode::kTrainFrozen);
  std::map<std::string, Tensor<float>> out;
  for (const auto& name : m.params().names_with_prefix(m.generator_prefix(d))) {
    out[name] = m.params().at(name).grad;
  }
  m.params().zero_grad();
  return out;
}

std::vector<LossReport> Trainer::dann_step(const Tensor<float>& real_s, const Tensor<float>& real_l,
                                           const Tensor<float>& z_s, const Tensor<float>& z_l) {
  if (config_.regime != Regime::kDann) throw ConfigError("dann_step needs the dann regime");
  auto& m = model_->dann();
  auto& params = model_->params();
  std::vector<LossReport> reports;

  params.zero_grad();
  auto l1 = dann_discriminator_gradients(m, real_s, real_l, z_s, z_l);
  guard(l1);
  apply("discriminator", "step3");
  reports.push_back(l1);

  params.zero_grad();
  auto gen = dann_generator_gradients(m, z_s, z_l, config_.non_saturating);
  guard(gen);
  apply("generator_s", "step4");
  apply("generator_l", "step4");
  reports.push_back(gen);

  std::optional<LossReport> l2;
  if (flags_.train_classifier_real) {
    params.zero_grad();
    const Tensor<float> real = concat_batch({&real_s, &real_l});
    const auto labels = domain_labels(real_s.dim(0), real_l.dim(0));
    auto r = relabel(classifier_gradients(m, real, labels, true), "real_samples");
    guard(r);
    apply("classifier", "step5");
    reports.push_back(r);
    l2 = r;
  }
  if (flags_.train_classifier_fake && iteration_ >= flags_.lazy_fake_start_iteration) {
    params.zero_grad();
    const Tensor<float> fs = m.generator(0).generate(z_s, Mode::kTrainFrozen);
    const Tensor<float> fl = m.generator(1).generate(z_l, Mode::kTrainFrozen);
    Tensor<float> fake = concat_batch({&fs, &fl});
    if (hooks_.on_classifier_fakes) hooks_.on_classifier_fakes(fake);
    const auto labels = domain_labels(z_s.dim(0), z_l.dim(0));
    auto r = relabel(classifier_gradients(m, fake, labels, false), "fake_samples");
    guard(r);
    apply("classifier", "step6");
    reports.push_back(r);
    if (!l2) l2 = r;
  }
  if (!l2) {
    const Tensor<float> real = concat_batch({&real_s, &real_l});
    l2 = evaluate_l2(m, real, domain_labels(real_s.dim(0), real_l.dim(0)));
  }
  reports.push_back(da_energy(l1, *l2));
  ++iteration_;
  return reports;
}

Tensor<float> Trainer::draw_z(std::size_t m) {
  const auto zd = static_cast<std::size_t>(config_.z_dim);
  Tensor<float> z({m, zd});
  for (auto& v : z.storage()) v = static_cast<float>(z_rng_.uniform(-1.0, 1.0));
  return z;
}

ImageBatch Trainer::real_batch(std::optional<Domain> domain) const {
  if (!corpus_) throw ConfigError("no corpus attached to the trainer");
  const MinibatchStream& s =
      streams_.size() == 1 ? *streams_.front() : *streams_.at(domain_index(domain.value_or(Domain::kS)));
  return load_batch(*corpus_, s.batch_ids(static_cast<std::uint64_t>(iteration_)), config_.resolution,
                    config_.allow_any_resolution);
}

std::vector<LossReport> Trainer::step() {
  const auto b = static_cast<std::size_t>(config_.batch_size);
  switch (config_.regime) {
    case Regime::kSingle:
    case Regime::kCombined: {
      const auto real = real_batch(std::nullopt);
      const auto z = draw_z(b);
      return gan_step(real.data, z);
    }
    default: {
      const auto rs = real_batch(Domain::kS);
      const auto rl = real_batch(Domain::kL);
      const auto zs = draw_z(b);
      const auto zl = draw_z(b);
      return config_.regime == Regime::kCogan ? cogan_step(rs.data, rl.data, zs, zl)
                                              : dann_step(rs.data, rl.data, zs, zl);
    }
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ckpt;
  for (const auto& [k, v] : config_.to_key_values()) ckpt.manifest[kConfigPrefix + k] = v;
  model_->spec().write(ckpt.manifest);
  ckpt.manifest["state.iteration"] = std::to_string(iteration_);
  ckpt.manifest["state.z_rng"] = z_rng_.state();
  for (const auto& [name, opt] : optimizers_) {
    ckpt.manifest["optim." + name + ".steps"] = std::to_string(opt.steps());
    for (const auto& [p, t] : opt.first_moments()) ckpt.extras["optim/" + name + "/m/" + p] = t;
    for (const auto& [p, t] : opt.second_moments()) ckpt.extras["optim/" + name + "/v/" + p] = t;
  }
  ckpt.params = model_->params().clone();
  return ckpt;
}

Trainer Trainer::resume(const Checkpoint& ckpt, const Corpus* corpus) {
  KeyValues config_kv;
  for (const auto& [k, v] : ckpt.manifest) {
    if (k.starts_with(kConfigPrefix)) config_kv[k.substr(std::string(kConfigPrefix).size())] = v;
  }
  if (config_kv.empty()) throw ConfigError("checkpoint carries no training configuration");
  Trainer t(TrainConfig::from_key_values(config_kv), corpus,
            Model(ModelSpec::read(ckpt.manifest), ckpt.params.clone()));
  t.iteration_ = require_int(ckpt.manifest, "state.iteration");
  t.z_rng_.set_state(require(ckpt.manifest, "state.z_rng"));
  for (auto& [name, opt] : t.optimizers_) {
    std::map<std::string, Tensor<float>> m, v;
    const std::string mp = "optim/" + name + "/m/", vp = "optim/" + name + "/v/";
    for (const auto& [k, a] : ckpt.extras) {
      if (k.starts_with(mp)) m[k.substr(mp.size())] = a;
      if (k.starts_with(vp)) v[k.substr(vp.size())] = a;
    }
    opt.restore(require_int(ckpt.manifest, "optim." + name + ".steps"), std::move(m), std::move(v));
  }
  return t;
}

// -------------------------------------------------------------- sampling

Tensor<float> seeded_z(std::size_t m, int z_dim, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> z({m, static_cast<std::size_t>(z_dim)});
  for (auto& v : z.storage()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return z;
}

Model load_model(const Checkpoint& ckpt) {
  return Model(ModelSpec::read(ckpt.manifest), ckpt.params.clone());
}

ImageBatch sample(Model& model, const Tensor<float>& z, std::optional<Domain> domain) {
  if (two_domain(model.spec().regime) && !domain) {
    throw ConfigError("a domain is required to sample from a " + to_string(model.spec().regime) +
                      " model");
  }
  const Domain d = domain.value_or(Domain::kS);
  ImageBatch out;
  out.data = model.generator(d).generate(z, Mode::kInference);
  out.domains.assign(out.data.dim(0), d);
  return out;
}

ImageBatch sample(const Checkpoint& ckpt, const Tensor<float>& z, std::optional<Domain> domain) {
  Model model = load_model(ckpt);
  return sample(model, z, domain);
}

std::pair<ImageBatch, ImageBatch> sample_paired(const Checkpoint& ckpt, const Tensor<float>& z) {
  Model model = load_model(ckpt);
  if (model.spec().regime != Regime::kCogan) {
    throw ConfigError("paired sampling needs a cogan checkpoint, got " +
                      to_string(model.spec().regime));
  }
  return {sample(model, z, Domain::kS), sample(model, z, Domain::kL)};
}

double diversity_score(const Tensor<float>& images) {
  const std::size_t n = images.rank() == 0 ? 0 : images.dim(0);
  if (n < 2) throw std::invalid_argument("diversity_score needs at least two samples");
  const std::size_t d = images.row_size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = images.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = images.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        s += diff * diff;
      }
      total += std::sqrt(s);
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return total / pairs / std::sqrt(static_cast<double>(d));
}

double classifier_accuracy(Model& model, const ImageBatch& batch) {
  auto& m = model.dann();
  const std::size_t n = batch.size();
  if (n == 0) throw ConfigError("empty evaluation batch");
  constexpr std::size_t kChunk = 64;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t end = std::min(n, begin + kChunk);
    const auto out = m.forward(slice_batch(batch.data, begin, end), Mode::kInference);
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = out.domain_logits.row(i - begin);
      const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == domain_index(batch.domains[i])) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

// ------------------------------------------------------------- run loop

fs::path RunLayout::checkpoint(std::int64_t iteration) const {
  char name[32];
  std::snprintf(name, sizeof name, "iter_%08lld", static_cast<long long>(iteration));
  return checkpoints() / name;
}

namespace {

std::string hash_tensor(const Tensor<float>& t) {
  NetworkParams<float> p;
  p.add("z", t);
  return fingerprint(p);
}

RgbImage sample_grid(Model& model, const Tensor<float>& z, const TrainConfig& c) {
  const int m = static_cast<int>(z.dim(0));
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
  auto grid_for = [&](std::optional<Domain> d) {
    const auto batch = sample(model, z, d);
    std::vector<RgbImage> tiles;
    for (int i = 0; i < m; ++i) tiles.push_back(batch_item(batch.data, static_cast<std::size_t>(i)));
    return tile_images(tiles, cols);
  };
  if (!two_domain(c.regime)) return grid_for(c.regime == Regime::kSingle ? std::optional(c.domain) : std::nullopt);
  return tile_images({grid_for(Domain::kS), grid_for(Domain::kL)}, 2, 8, 128);
}

void prune_checkpoints(const RunLayout& layout, std::int64_t epoch_length, int keep_last) {
  std::vector<std::pair<std::int64_t, fs::path>> found;
  for (const auto& e : fs::directory_iterator(layout.checkpoints())) {
    const std::string name = e.path().filename().string();
    if (!name.starts_with("iter_")) continue;
    found.emplace_back(parse_int(name.substr(5), "checkpoint iteration"), e.path());
  }
  std::sort(found.begin(), found.end());
  const std::size_t keep_from = found.size() > static_cast<std::size_t>(keep_last)
                                    ? found.size() - static_cast<std::size_t>(keep_last)
                                    : 0;
  for (std::size_t i = 0; i < keep_from; ++i) {
    if (found[i].first % epoch_length != 0) fs::remove_all(found[i].second);
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, const Corpus& corpus, const fs::path& run_dir,
                  const std::optional<fs::path>& resume_from,
                  const std::function<void(const std::string&)>& log) {
  config.validate();
  const RunLayout layout{run_dir};
  fs::create_directories(layout.checkpoints());
  fs::create_directories(layout.samples());
  write_key_values(layout.config(), config.to_key_values());

  std::unique_ptr<Trainer> trainer;
  if (resume_from) {
    Checkpoint ckpt = load_checkpoint(*resume_from);
    const auto wanted = config.to_key_values();
    for (const char* k : {"iterations", "checkpoint_every", "sample_every", "keep_last"}) {
      ckpt.manifest[kConfigPrefix + std::string(k)] = wanted.at(k);
    }
    trainer = std::make_unique<Trainer>(Trainer::resume(ckpt, &corpus));
    if (trainer->config().to_key_values() != wanted) {
      throw ConfigError("checkpoint " + resume_from->string() +
                        " was trained with a different configuration");
    }
  } else {
    trainer = std::make_unique<Trainer>(config, &corpus);
  }

  const std::int64_t epoch = trainer->iterations_per_epoch();
  const std::int64_t ckpt_every = config.checkpoint_every > 0 ? config.checkpoint_every : epoch;
  const std::int64_t sample_every = config.sample_every > 0 ? config.sample_every : epoch;
  const Tensor<float> dump_z = seeded_z(static_cast<std::size_t>(config.sample_count), config.z_dim,
                                        stream_seed(config, Stream::kDump));
  TrainResult result;
  result.dump_z_hash = hash_tensor(dump_z);

  auto save = [&](const fs::path& dir) {
    Checkpoint ckpt = trainer->checkpoint();
    ckpt.manifest["dump.z_hash"] = result.dump_z_hash;
    save_checkpoint(dir, ckpt);
    return dir;
  };

  std::ofstream loss_log(layout.loss_log(), resume_from ? std::ios::app : std::ios::trunc);
  if (!loss_log) throw IoError("cannot open " + layout.loss_log().string());

  while (trainer->iteration() < config.iterations) {
    const std::int64_t t = trainer->iteration();
    std::vector<LossReport> reports;
    try {
      reports = trainer->step();
    } catch (const NumericalError&) {
      save(layout.checkpoints() / ("abort_" + std::to_string(t)));
      throw;
    }
    for (const auto& r : reports) loss_log << r.log_line(t) << '\n';
    loss_log.flush();

    const std::int64_t done = trainer->iteration();
    if (done % ckpt_every == 0 || done == config.iterations) {
      result.final_checkpoint = save(layout.checkpoint(done));
      prune_checkpoints(layout, epoch, config.keep_last);
      if (log) log("iteration " + std::to_string(done) + ": checkpoint " + result.final_checkpoint.string());
    }
    if (done % sample_every == 0) {
      const fs::path png = layout.samples() / ("epoch_" + std::to_string(done / sample_every) + ".png");
      if (hash_tensor(dump_z) != result.dump_z_hash) throw std::logic_error("dump z batch changed");
      write_png(png, sample_grid(trainer->model(), dump_z, config));
      result.sample_grids.push_back(png);
    }
  }
  if (result.final_checkpoint.empty()) result.final_checkpoint = save(layout.checkpoint(trainer->iteration()));
  result.iterations = trainer->iteration();
  return result;
}

}  // namespace crossgan
