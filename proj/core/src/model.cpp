#include "crossgan/model.hpp"

#include <sstream>

#include "crossgan/error.hpp"
#include "crossgan/rng.hpp"

namespace crossgan {
namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::kSingle: return "single";
    case Regime::kCombined: return "combined";
    case Regime::kCogan: return "cogan";
    case Regime::kDann: return "dann";
    case Regime::kToy: return "toy";
  }
  return "?";
}

Regime parse_regime(const std::string& text) {
  for (Regime r : {Regime::kSingle, Regime::kCombined, Regime::kCogan, Regime::kDann, Regime::kToy}) {
    if (to_string(r) == text) return r;
  }
  throw ConfigError("unknown regime '" + text + "' (expected single, combined, cogan, dann or toy)");
}

void ModelSpec::write(KeyValues& kv) const {
  kv["model.regime"] = to_string(regime);
  kv["model.resolution"] = std::to_string(generator.resolution);
  kv["model.z_dim"] = std::to_string(generator.z_dim);
  kv["model.generator_channels"] = std::to_string(generator.base_channels);
  kv["model.discriminator_channels"] = std::to_string(discriminator.base_channels);
  kv["model.classifier_width"] = std::to_string(classifier_width);
  kv["model.generator_ties"] = join(generator_ties);
  kv["model.discriminator_ties"] = join(discriminator_ties);
}

ModelSpec ModelSpec::read(const KeyValues& kv) {
  ModelSpec s;
  s.regime = parse_regime(require(kv, "model.regime"));
  const int res = static_cast<int>(require_int(kv, "model.resolution"));
  s.generator.resolution = res;
  s.discriminator.resolution = res;
  s.generator.z_dim = static_cast<int>(require_int(kv, "model.z_dim"));
  s.generator.base_channels = static_cast<int>(require_int(kv, "model.generator_channels"));
  s.discriminator.base_channels = static_cast<int>(require_int(kv, "model.discriminator_channels"));
  s.classifier_width = static_cast<int>(require_int(kv, "model.classifier_width"));
  if (auto it = kv.find("model.generator_ties"); it != kv.end()) s.generator_ties = split(it->second);
  if (auto it = kv.find("model.discriminator_ties"); it != kv.end()) {
    s.discriminator_ties = split(it->second);
  }
  return s;
}

Model::Model(ModelSpec spec, NetworkParams<float> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  switch (spec_.regime) {
    case Regime::kSingle:
    case Regime::kCombined: {
      generators_.push_back(std::make_unique<Generator<float>>(spec_.generator, params_.view("G/")));
      const auto d = params_.view("D/");
      discriminators_.push_back(std::make_unique<Discriminator<float>>(spec_.discriminator, d, d));
      break;
    }
    case Regime::kCogan:
      for (const char* g : {"Gs/", "Gl/"}) {
        generators_.push_back(std::make_unique<Generator<float>>(spec_.generator, params_.view(g)));
      }
      for (const char* p : {"Ds/", "Dl/"}) {
        const auto d = params_.view(p);
        discriminators_.push_back(std::make_unique<Discriminator<float>>(spec_.discriminator, d, d));
      }
      break;
    case Regime::kDann:
      dann_ = std::make_unique<DannModel<float>>(
          DannSpec{spec_.generator, spec_.discriminator, spec_.classifier_width, 2}, params_);
      break;
    case Regime::kToy:
      throw ConfigError("the toy regime has no image model");
  }
}

Model Model::initialize(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.generator.resolution != spec.discriminator.resolution) {
    throw ConfigError("generator and discriminator resolutions differ");
  }
  NetworkParams<float> params(seed);
  switch (spec.regime) {
    case Regime::kSingle:
    case Regime::kCombined:
      params.adopt("G/", build_generator(spec.generator, derive_seed(seed, 0)));
      params.adopt("D/", build_discriminator(spec.discriminator, derive_seed(seed, 1)));
      break;
    case Regime::kCogan:
      params = build_cogan(CoupledSpec{spec.generator, spec.discriminator, spec.generator_ties,
                                       spec.discriminator_ties},
                           seed);
      break;
    case Regime::kDann:
      params = build_dann(DannSpec{spec.generator, spec.discriminator, spec.classifier_width, 2}, seed);
      break;
    case Regime::kToy:
      throw ConfigError("the toy regime has no image model");
  }
  return Model(spec, std::move(params));
}

Generator<float>& Model::generator(Domain d) {
  if (dann_) return dann_->generator(domain_index(d));
  return *generators_.at(generators_.size() == 1 ? 0 : domain_index(d));
}

Discriminator<float>& Model::discriminator(Domain d) {
  if (dann_) return dann_->discriminator();
  return *discriminators_.at(discriminators_.size() == 1 ? 0 : domain_index(d));
}

DomainClassifier<float>& Model::classifier() {
  if (!dann_) throw ConfigError("model of regime " + to_string(spec_.regime) + " has no domain classifier");
  return dann_->classifier();
}

DannModel<float>& Model::dann() {
  if (!dann_) throw ConfigError("model of regime " + to_string(spec_.regime) + " is not a dann model");
  return *dann_;
}

std::string Model::generator_prefix(Domain d) const {
  switch (spec_.regime) {
    case Regime::kCogan: return d == Domain::kS ? "Gs/" : "Gl/";
    case Regime::kDann: return d == Domain::kS ? kGroupGs : kGroupGl;
    default: return "G/";
  }
}

std::vector<std::string> Model::discriminator_prefixes(Domain d) const {
  switch (spec_.regime) {
    case Regime::kCogan: return {d == Domain::kS ? "Ds/" : "Dl/"};
    case Regime::kDann: return {kGroupTrunk, kGroupRealness};
    default: return {"D/"};
  }
}

std::vector<std::string> Model::tied_names() const {
  std::vector<std::string> out;
  if (spec_.regime != Regime::kCogan) return out;
  for (const auto& [name, h] : params_.entries()) {
    if (name.starts_with("Gl/") && params_.aliased(name, "Gs/" + name.substr(3))) out.push_back(name);
    if (name.starts_with("Dl/") && params_.aliased(name, "Ds/" + name.substr(3))) out.push_back(name);
  }
  return out;
}

}  // namespace crossgan
