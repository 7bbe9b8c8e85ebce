#include "crossgan/nets.hpp"

#include <bit>

#include "crossgan/error.hpp"
#include "crossgan/rng.hpp"

namespace crossgan {
namespace {

constexpr double kInitStddev = 0.02;
constexpr double kLeakySlope = 0.2;
constexpr int kKernel = 4;

int ladder_depth(int resolution) {
  if (resolution < 8 || resolution % 4 != 0 ||
      !std::has_single_bit(static_cast<unsigned>(resolution / 4))) {
    throw ConfigError("resolution must be a power-of-two multiple of 4 (>= 8), got " +
                      std::to_string(resolution));
  }
  return std::countr_zero(static_cast<unsigned>(resolution / 4));
}

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

// Parameters are declared first and initialized afterwards in name order, so
// the values depend only on the seed and the set of names.
struct ParamPlan {
  struct Entry {
    std::string name;
    Shape shape;
    enum { kGaussian, kOnes, kZeros } init;
    bool trainable;
  };
  std::vector<Entry> entries;

  void weight(const std::string& name, Shape shape) {
    entries.push_back({name, std::move(shape), Entry::kGaussian, true});
  }
  void bias(const std::string& name, std::size_t n) {
    entries.push_back({name, {n}, Entry::kZeros, true});
  }
  void batch_norm(const std::string& prefix, std::size_t c) {
    entries.push_back({prefix + ".gamma", {c}, Entry::kOnes, true});
    entries.push_back({prefix + ".beta", {c}, Entry::kZeros, true});
    entries.push_back({prefix + ".running_mean", {c}, Entry::kZeros, false});
    entries.push_back({prefix + ".running_var", {c}, Entry::kOnes, false});
  }

  NetworkParams<float> materialize(std::uint64_t seed, double stddev = kInitStddev) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.name < b.name; });
    Rng rng(seed);
    NetworkParams<float> params(seed);
    for (auto& e : entries) {
      Tensor<float> t(e.shape);
      switch (e.init) {
        case Entry::kGaussian:
          for (auto& v : t.storage()) v = static_cast<float>(rng.normal(0.0, stddev));
          break;
        case Entry::kOnes:
          t.fill(1.0f);
          break;
        case Entry::kZeros:
          break;
      }
      params.add(e.name, std::move(t), e.trainable);
    }
    return params;
  }
};

void plan_generator(const GeneratorSpec& spec, ParamPlan& plan) {
  spec.validate();
  const auto names = spec.block_names();
  const auto ch = spec.block_channels();
  plan.weight("proj.weight", {sz(ch[0]) * 16, sz(spec.z_dim)});
  plan.batch_norm("proj.bn", sz(ch[0]));
  for (std::size_t b = 1; b < names.size(); ++b) {
    plan.weight(names[b] + ".weight", {sz(ch[b - 1]), sz(ch[b]), kKernel, kKernel});
    if (b + 1 < names.size()) {
      plan.batch_norm(names[b] + ".bn", sz(ch[b]));
    } else {
      plan.bias(names[b] + ".bias", sz(ch[b]));
    }
  }
}

void plan_trunk(const DiscriminatorSpec& spec, ParamPlan& plan) {
  spec.validate();
  const auto ch = spec.block_channels();
  int in = 3;
  for (int b = 0; b < spec.downsampling_blocks(); ++b) {
    const std::string name = "down" + std::to_string(b + 1);
    plan.weight(name + ".weight", {sz(ch[b]), sz(in), kKernel, kKernel});
    plan.batch_norm(name + ".bn", sz(ch[b]));
    in = ch[b];
  }
}

void plan_realness_head(const DiscriminatorSpec& spec, ParamPlan& plan) {
  plan.weight("head.weight", {1, sz(spec.feature_width())});
  plan.bias("head.bias", 1);
}

void plan_classifier(const DannSpec& spec, ParamPlan& plan) {
  plan.weight("fc1.weight", {sz(spec.classifier_width), sz(spec.discriminator.feature_width())});
  plan.bias("fc1.bias", sz(spec.classifier_width));
  plan.weight("fc2.weight", {sz(spec.num_domains), sz(spec.classifier_width)});
  plan.bias("fc2.bias", sz(spec.num_domains));
}

template <typename T>
std::unique_ptr<Layer<T>> batch_norm(const NetworkParams<T>& p, const std::string& prefix) {
  return std::make_unique<BatchNorm<T>>(p.handle(prefix + ".gamma"), p.handle(prefix + ".beta"),
                                        p.handle(prefix + ".running_mean"),
                                        p.handle(prefix + ".running_var"));
}

}  // namespace

// ----------------------------------------------------------------- specs

int GeneratorSpec::upsampling_blocks() const { return ladder_depth(resolution); }

std::vector<std::string> GeneratorSpec::block_names() const {
  const int n = upsampling_blocks();
  std::vector<std::string> names{"proj"};
  for (int i = 1; i < n; ++i) names.push_back("up" + std::to_string(i));
  names.push_back("out");
  return names;
}

std::vector<int> GeneratorSpec::block_channels() const {
  const int n = upsampling_blocks();
  std::vector<int> ch;
  for (int i = 0; i < n; ++i) ch.push_back(base_channels << (n - 1 - i));
  ch.push_back(3);
  return ch;
}

void GeneratorSpec::validate() const {
  ladder_depth(resolution);
  if (z_dim < 1) throw ConfigError("z_dim must be positive");
  if (base_channels < 1) throw ConfigError("base_channels must be positive");
}

int DiscriminatorSpec::downsampling_blocks() const { return ladder_depth(resolution); }

std::vector<std::string> DiscriminatorSpec::block_names() const {
  std::vector<std::string> names;
  for (int i = 1; i <= downsampling_blocks(); ++i) names.push_back("down" + std::to_string(i));
  names.push_back("head");
  return names;
}

std::vector<int> DiscriminatorSpec::block_channels() const {
  std::vector<int> ch;
  for (int i = 0; i < downsampling_blocks(); ++i) ch.push_back(base_channels << i);
  return ch;
}

int DiscriminatorSpec::feature_width() const { return block_channels().back() * 16; }

void DiscriminatorSpec::validate() const {
  ladder_depth(resolution);
  if (base_channels < 1) throw ConfigError("base_channels must be positive");
}

std::vector<std::string> CoupledSpec::default_generator_ties(const GeneratorSpec& spec) {
  auto names = spec.block_names();
  std::vector<std::string> ties;
  for (std::size_t i = 0; i + 2 < names.size(); ++i) ties.push_back(names[i] + ".");
  return ties;
}

std::vector<std::string> CoupledSpec::default_discriminator_ties(const DiscriminatorSpec& spec) {
  auto names = spec.block_names();
  return {names[names.size() - 2] + ".", names.back() + "."};
}

// -------------------------------------------------------------- builders

NetworkParams<float> build_generator(const GeneratorSpec& spec, std::uint64_t seed) {
  ParamPlan plan;
  plan_generator(spec, plan);
  return plan.materialize(seed);
}

NetworkParams<float> build_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) {
  ParamPlan plan;
  plan_trunk(spec, plan);
  plan_realness_head(spec, plan);
  return plan.materialize(seed);
}

NetworkParams<float> build_dann(const DannSpec& spec, std::uint64_t seed) {
  if (spec.num_domains < 2) throw ConfigError("num_domains must be >= 2");
  if (spec.classifier_width < 1) throw ConfigError("classifier_width must be positive");
  if (spec.generator.resolution != spec.discriminator.resolution) {
    throw ConfigError("generator and discriminator resolutions differ");
  }
  ParamPlan gs, gl, trunk, head, cls;
  plan_generator(spec.generator, gs);
  plan_generator(spec.generator, gl);
  plan_trunk(spec.discriminator, trunk);
  plan_realness_head(spec.discriminator, head);
  plan_classifier(spec, cls);

  NetworkParams<float> params(seed);
  params.adopt(kGroupGs, gs.materialize(derive_seed(seed, 0)));
  params.adopt(kGroupGl, gl.materialize(derive_seed(seed, 1)));
  params.adopt(kGroupTrunk, trunk.materialize(derive_seed(seed, 2)));
  params.adopt(kGroupRealness, head.materialize(derive_seed(seed, 3)));
  params.adopt(kGroupClassifier, cls.materialize(derive_seed(seed, 4)));
  return params;
}

NetworkParams<float> build_cogan(const CoupledSpec& spec, std::uint64_t seed) {
  if (spec.generator.resolution != spec.discriminator.resolution) {
    throw ConfigError("generator and discriminator resolutions differ");
  }
  const auto gties = spec.generator_ties.empty()
                         ? CoupledSpec::default_generator_ties(spec.generator)
                         : spec.generator_ties;
  const auto dties = spec.discriminator_ties.empty()
                         ? CoupledSpec::default_discriminator_ties(spec.discriminator)
                         : spec.discriminator_ties;
  auto gen = tie_parameters(build_generator(spec.generator, derive_seed(seed, 0)),
                            build_generator(spec.generator, derive_seed(seed, 1)), gties);
  auto disc = tie_parameters(build_discriminator(spec.discriminator, derive_seed(seed, 2)),
                             build_discriminator(spec.discriminator, derive_seed(seed, 3)), dties);
  NetworkParams<float> params(seed);
  params.adopt("Gs/", gen.first);
  params.adopt("Gl/", gen.second);
  params.adopt("Ds/", disc.first);
  params.adopt("Dl/", disc.second);
  return params;
}

NetworkParams<float> build_mlp(const std::vector<int>& widths, std::uint64_t seed,
                               double init_stddev) {
  if (widths.size() < 2) throw ConfigError("an MLP needs at least input and output widths");
  ParamPlan plan;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const std::string name = "fc" + std::to_string(i + 1);
    plan.weight(name + ".weight", {sz(widths[i + 1]), sz(widths[i])});
    plan.bias(name + ".bias", sz(widths[i + 1]));
  }
  return plan.materialize(seed, init_stddev);
}

// ---------------------------------------------------------------- wiring

template <typename T>
Sequential<T> generator_network(const GeneratorSpec& spec, const NetworkParams<T>& p) {
  spec.validate();
  const auto names = spec.block_names();
  const auto ch = spec.block_channels();
  Sequential<T> net;
  net.add("proj", std::make_unique<Linear<T>>(p.handle("proj.weight"), nullptr));
  net.add("proj", std::make_unique<Reshape<T>>(Shape{sz(ch[0]), 4, 4}));
  net.add("proj", batch_norm(p, "proj.bn"));
  net.add("proj", std::make_unique<ReLU<T>>());
  for (std::size_t b = 1; b < names.size(); ++b) {
    const bool last = b + 1 == names.size();
    net.add(names[b], std::make_unique<ConvTranspose2d<T>>(
                          p.handle(names[b] + ".weight"),
                          last ? p.handle(names[b] + ".bias") : nullptr, 2, 1));
    if (last) {
      net.add(names[b], std::make_unique<Tanh<T>>());
    } else {
      net.add(names[b], batch_norm(p, names[b] + ".bn"));
      net.add(names[b], std::make_unique<ReLU<T>>());
    }
  }
  return net;
}

template <typename T>
Sequential<T> trunk_network(const DiscriminatorSpec& spec, const NetworkParams<T>& p) {
  spec.validate();
  Sequential<T> net;
  const int n = spec.downsampling_blocks();
  for (int b = 1; b <= n; ++b) {
    const std::string name = "down" + std::to_string(b);
    net.add(name, std::make_unique<Conv2d<T>>(p.handle(name + ".weight"), nullptr, 2, 1));
    net.add(name, batch_norm(p, name + ".bn"));
    net.add(name, std::make_unique<LeakyReLU<T>>(kLeakySlope));
  }
  net.add("down" + std::to_string(n),
          std::make_unique<Reshape<T>>(Shape{sz(spec.feature_width())}));
  return net;
}

template <typename T>
Sequential<T> realness_head(const NetworkParams<T>& p) {
  Sequential<T> net;
  net.add("head", std::make_unique<Linear<T>>(p.handle("head.weight"), p.handle("head.bias")));
  return net;
}

template <typename T>
Sequential<T> classifier_head(const NetworkParams<T>& p) {
  Sequential<T> net;
  net.add("hidden", std::make_unique<Linear<T>>(p.handle("fc1.weight"), p.handle("fc1.bias")));
  net.add("hidden", std::make_unique<LeakyReLU<T>>(kLeakySlope));
  net.add("logits", std::make_unique<Linear<T>>(p.handle("fc2.weight"), p.handle("fc2.bias")));
  return net;
}

template <typename T>
Sequential<T> mlp_network(const NetworkParams<T>& p, std::size_t layers, bool leaky) {
  Sequential<T> net;
  for (std::size_t i = 1; i <= layers; ++i) {
    const std::string name = "fc" + std::to_string(i);
    net.add(name, std::make_unique<Linear<T>>(p.handle(name + ".weight"), p.handle(name + ".bias")));
    if (i < layers) {
      if (leaky) {
        net.add(name, std::make_unique<LeakyReLU<T>>(kLeakySlope));
      } else {
        net.add(name, std::make_unique<ReLU<T>>());
      }
    }
  }
  return net;
}

// ---------------------------------------------------------------- models

template <typename T>
Trace<T> Generator<T>::forward(const Tensor<T>& z, Mode mode) {
  if (z.rank() != 2 || z.dim(1) != sz(spec_.z_dim)) {
    throw ConfigError("z batch must have shape (m, " + std::to_string(spec_.z_dim) + "), got " +
                      shape_to_string(z.shape()));
  }
  return net_.forward(z, mode);
}

template <typename T>
Discriminator<T>::Discriminator(DiscriminatorSpec spec, const NetworkParams<T>& trunk,
                                const NetworkParams<T>& head)
    : spec_(spec), trunk_(trunk_network(spec, trunk)), head_(realness_head(head)) {}

template <typename T>
DiscriminatorPass<T> Discriminator<T>::forward(const Tensor<T>& images, Mode mode) {
  const std::size_t res = sz(spec_.resolution);
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != res || images.dim(3) != res) {
    throw ConfigError("discriminator expects (b, 3, " + std::to_string(res) + ", " +
                      std::to_string(res) + ") images, got " + shape_to_string(images.shape()));
  }
  DiscriminatorPass<T> pass;
  pass.trunk = trunk_.forward(images, mode);
  pass.head = head_.forward(pass.trunk.output, mode);
  const std::size_t n = images.dim(0);
  pass.logits.resize(n);
  pass.probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pass.logits[i] = pass.head.output[i];
    pass.probs[i] = sigmoid(pass.logits[i]);
  }
  return pass;
}

template <typename T>
Tensor<T> Discriminator<T>::backward(const DiscriminatorPass<T>& pass,
                                     const std::vector<T>& grad_logits) {
  Tensor<T> g({grad_logits.size(), 1}, std::vector<T>(grad_logits));
  Tensor<T> gf = head_.backward(pass.head, g);
  return trunk_.backward(pass.trunk, gf);
}

template <typename T>
DannModel<T>::DannModel(const DannSpec& spec, const NetworkParams<T>& params)
    : spec_(spec),
      gs_(spec.generator, params.view(kGroupGs)),
      gl_(spec.generator, params.view(kGroupGl)),
      disc_(spec.discriminator, params.view(kGroupTrunk), params.view(kGroupRealness)),
      cls_(params.view(kGroupClassifier)) {}

template <typename T>
DannOutputs<T> DannModel<T>::forward(const Tensor<T>& images, Mode mode) {
  auto pass = disc_.forward(images, mode);
  auto cls = cls_.forward(pass.features(), mode);
  return {pass.probs, cls.logits(), pass.features(), cls.hidden()};
}

#define CROSSGAN_INSTANTIATE_NETS(T)                                                         \
  template Sequential<T> generator_network(const GeneratorSpec&, const NetworkParams<T>&);   \
  template Sequential<T> trunk_network(const DiscriminatorSpec&, const NetworkParams<T>&);   \
  template Sequential<T> realness_head(const NetworkParams<T>&);                             \
  template Sequential<T> classifier_head(const NetworkParams<T>&);                           \
  template Sequential<T> mlp_network(const NetworkParams<T>&, std::size_t, bool);            \
  template class Generator<T>;                                                               \
  template class Discriminator<T>;                                                           \
  template class DannModel<T>;

CROSSGAN_INSTANTIATE_NETS(float)
CROSSGAN_INSTANTIATE_NETS(double)

}  // namespace crossgan
