#pragma once

#include <memory>
#include <string>
#include <vector>

#include "crossgan/checkpoint.hpp"
#include "crossgan/config.hpp"
#include "crossgan/corpus.hpp"
#include "crossgan/nets.hpp"

namespace crossgan {

/// single: one GAN on one domain; combined: one GAN on both domains;
/// cogan: two weight-tied GANs; dann: domain-adaptation model;
/// toy: 2-D MLP GAN on a ring of Gaussians (no images).
enum class Regime { kSingle, kCombined, kCogan, kDann, kToy };

std::string to_string(Regime r);
Regime parse_regime(const std::string& text);
inline bool two_domain(Regime r) { return r == Regime::kCogan || r == Regime::kDann; }

/// Architecture of an image model: everything needed to rebuild its wiring.
struct ModelSpec {
  Regime regime = Regime::kDann;
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;
  int classifier_width = 128;
  /// CoGAN tie lists; empty selects the defaults.
  std::vector<std::string> generator_ties;
  std::vector<std::string> discriminator_ties;

  /// Keys prefixed "model.".
  void write(KeyValues& kv) const;
  static ModelSpec read(const KeyValues& kv);
};

/// Wired networks over one parameter container.
///
/// Parameter groups: single/combined use "G/" and "D/"; cogan uses "Gs/",
/// "Gl/", "Ds/", "Dl/" (tied entries share storage); dann uses the kGroup*
/// prefixes of nets.hpp.
class Model {
 public:
  Model(ModelSpec spec, NetworkParams<float> params);

  /// Freshly initialized parameters for the spec's regime.
  static Model initialize(const ModelSpec& spec, std::uint64_t seed);

  const ModelSpec& spec() const noexcept { return spec_; }
  NetworkParams<float>& params() noexcept { return params_; }
  const NetworkParams<float>& params() const noexcept { return params_; }

  /// The generator of a domain; single-network regimes ignore the domain.
  Generator<float>& generator(Domain d);
  Discriminator<float>& discriminator(Domain d);
  bool has_classifier() const noexcept { return dann_ != nullptr; }
  DomainClassifier<float>& classifier();
  DannModel<float>& dann();

  std::string generator_prefix(Domain d) const;
  /// Group prefixes of the trunk and realness head used for domain `d`.
  std::vector<std::string> discriminator_prefixes(Domain d) const;
  /// Names of tied parameters (second domain's names), empty unless cogan.
  std::vector<std::string> tied_names() const;

 private:
  ModelSpec spec_;
  NetworkParams<float> params_;
  std::vector<std::unique_ptr<Generator<float>>> generators_;
  std::vector<std::unique_ptr<Discriminator<float>>> discriminators_;
  std::unique_ptr<DannModel<float>> dann_;
};

}  // namespace crossgan
