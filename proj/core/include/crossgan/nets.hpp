#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "crossgan/layers.hpp"
#include "crossgan/params.hpp"
#include "crossgan/tensor.hpp"

namespace crossgan {

/// DCGAN generator: a linear projection of z onto a 4x4 seed map, then
/// fractional-strided convolution blocks that double the spatial size and
/// halve the channel count, ending in a 3-channel tanh output block.
struct GeneratorSpec {
  int z_dim = 1024;
  int resolution = 64;
  int base_channels = 128;

  /// log2(resolution / 4), counting the output block.
  int upsampling_blocks() const;
  /// "proj", "up1", ..., "up{n-1}", "out".
  std::vector<std::string> block_names() const;
  /// Output channels of each block, in block order.
  std::vector<int> block_channels() const;
  void validate() const;

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

/// DCGAN discriminator: strided convolution blocks down to a 4x4 map whose
/// flattened activation is the penultimate feature vector, then a linear
/// realness head (sigmoid applied by the losses).
struct DiscriminatorSpec {
  int resolution = 64;
  int base_channels = 128;

  int downsampling_blocks() const;
  /// "down1", ..., "down{n}", "head".
  std::vector<std::string> block_names() const;
  std::vector<int> block_channels() const;
  /// Width F of the penultimate feature vector.
  int feature_width() const;
  void validate() const;

  friend bool operator==(const DiscriminatorSpec&, const DiscriminatorSpec&) = default;
};

struct CoupledSpec {
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;
  /// Parameter names or block prefixes ("up1.") shared between the two
  /// generators / discriminators. Empty lists select the defaults below.
  std::vector<std::string> generator_ties;
  std::vector<std::string> discriminator_ties;

  /// Every generator block except the final two.
  static std::vector<std::string> default_generator_ties(const GeneratorSpec& spec);
  /// Last convolution block and the realness head.
  static std::vector<std::string> default_discriminator_ties(const DiscriminatorSpec& spec);
};

/// Two generators, a shared discriminator trunk, a realness head and a
/// k-way domain-classifier head with one hidden layer of width C.
struct DannSpec {
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;
  int classifier_width = 128;
  int num_domains = 2;
};

/// Parameter-group prefixes of a domain-adaptation model.
inline constexpr const char* kGroupGs = "Gs/";
inline constexpr const char* kGroupGl = "Gl/";
inline constexpr const char* kGroupTrunk = "a/";
inline constexpr const char* kGroupRealness = "f/";
inline constexpr const char* kGroupClassifier = "c/";

/// Gaussian(0, 0.02) convolution and linear weights, batch-norm scale 1 and
/// shift 0, zero biases. Deterministic in `seed`. Names are unprefixed.
NetworkParams<float> build_generator(const GeneratorSpec& spec, std::uint64_t seed);
NetworkParams<float> build_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);
/// Groups under kGroupGs, kGroupGl, kGroupTrunk, kGroupRealness and
/// kGroupClassifier.
NetworkParams<float> build_dann(const DannSpec& spec, std::uint64_t seed);
/// Groups "Gs/", "Gl/", "Ds/", "Dl/" with the tie lists applied.
NetworkParams<float> build_cogan(const CoupledSpec& spec, std::uint64_t seed);
/// Multi-layer perceptron "fc1", "fc2", ... with the given layer widths.
NetworkParams<float> build_mlp(const std::vector<int>& widths, std::uint64_t seed,
                               double init_stddev);

/// Network wiring. The params passed in must carry the unprefixed names of
/// the matching build_* function (use NetworkParams::view for groups).
template <typename T>
Sequential<T> generator_network(const GeneratorSpec& spec, const NetworkParams<T>& params);
/// Convolution blocks plus a flatten; output is the (N, F) feature matrix.
template <typename T>
Sequential<T> trunk_network(const DiscriminatorSpec& spec, const NetworkParams<T>& params);
/// (N, F) features to (N, 1) realness logits.
template <typename T>
Sequential<T> realness_head(const NetworkParams<T>& params);
/// Blocks "hidden" (linear + LeakyReLU, width C) and "logits" (width k).
template <typename T>
Sequential<T> classifier_head(const NetworkParams<T>& params);
/// Linear layers with `hidden` activation between them, none after the last.
template <typename T>
Sequential<T> mlp_network(const NetworkParams<T>& params, std::size_t layers, bool leaky);

template <typename T>
class Generator {
 public:
  Generator(GeneratorSpec spec, const NetworkParams<T>& params)
      : spec_(spec), net_(generator_network(spec, params)) {}

  Trace<T> forward(const Tensor<T>& z, Mode mode);
  Tensor<T> generate(const Tensor<T>& z, Mode mode) { return forward(z, mode).output; }
  Tensor<T> backward(const Trace<T>& trace, const Tensor<T>& grad_images) {
    return net_.backward(trace, grad_images);
  }
  const GeneratorSpec& spec() const noexcept { return spec_; }
  const std::vector<std::string>& block_names() const { return net_.block_names(); }

 private:
  GeneratorSpec spec_;
  Sequential<T> net_;
};

/// Forward results of a discriminator pass. Keep it alive until backward.
template <typename T>
struct DiscriminatorPass {
  Trace<T> trunk;
  Trace<T> head;
  std::vector<T> logits;
  std::vector<T> probs;
  const Tensor<T>& features() const { return trunk.output; }
};

template <typename T>
class Discriminator {
 public:
  /// `trunk` and `head` are views holding the unprefixed block names.
  Discriminator(DiscriminatorSpec spec, const NetworkParams<T>& trunk,
                const NetworkParams<T>& head);

  DiscriminatorPass<T> forward(const Tensor<T>& images, Mode mode);
  /// Backpropagates d(objective)/d(logit) per item; returns the image gradient.
  Tensor<T> backward(const DiscriminatorPass<T>& pass, const std::vector<T>& grad_logits);
  /// Features only (no realness head).
  Trace<T> trunk_forward(const Tensor<T>& images, Mode mode) { return trunk_.forward(images, mode); }
  Tensor<T> trunk_backward(const Trace<T>& trace, const Tensor<T>& grad_features) {
    return trunk_.backward(trace, grad_features);
  }
  const DiscriminatorSpec& spec() const noexcept { return spec_; }

 private:
  DiscriminatorSpec spec_;
  Sequential<T> trunk_;
  Sequential<T> head_;
};

template <typename T>
struct ClassifierPass {
  Trace<T> head;
  /// (N, k) domain logits.
  const Tensor<T>& logits() const { return head.output; }
  /// (N, C) penultimate activation.
  const Tensor<T>& hidden() const { return head.block_outputs.at(0); }
};

template <typename T>
class DomainClassifier {
 public:
  explicit DomainClassifier(const NetworkParams<T>& params) : head_(classifier_head(params)) {}
  ClassifierPass<T> forward(const Tensor<T>& features, Mode mode) {
    return {head_.forward(features, mode)};
  }
  Tensor<T> backward(const ClassifierPass<T>& pass, const Tensor<T>& grad_logits) {
    return head_.backward(pass.head, grad_logits);
  }

 private:
  Sequential<T> head_;
};

/// All four named outputs of a domain-adaptation forward pass.
template <typename T>
struct DannOutputs {
  std::vector<T> realness;          ///< (b) probabilities
  Tensor<T> domain_logits;          ///< (b, k)
  Tensor<T> trunk_features;         ///< (b, F)
  Tensor<T> classifier_features;    ///< (b, C)
};

/// Two generators, shared trunk, realness and classifier heads wired to one
/// parameter container with the kGroup* prefixes.
template <typename T>
class DannModel {
 public:
  DannModel(const DannSpec& spec, const NetworkParams<T>& params);

  Generator<T>& generator(int domain) { return domain == 0 ? gs_ : gl_; }
  Discriminator<T>& discriminator() { return disc_; }
  DomainClassifier<T>& classifier() { return cls_; }
  DannOutputs<T> forward(const Tensor<T>& images, Mode mode);
  const DannSpec& spec() const noexcept { return spec_; }

 private:
  DannSpec spec_;
  Generator<T> gs_, gl_;
  Discriminator<T> disc_;
  DomainClassifier<T> cls_;
};

/// Stable logistic function.
template <typename T>
T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

}  // namespace crossgan
