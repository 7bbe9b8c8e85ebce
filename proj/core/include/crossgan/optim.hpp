#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crossgan/params.hpp"

namespace crossgan {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order optimizer over a fixed set of parameter-name prefixes.
///
/// step() always descends: theta <- theta - lr * update(grad). Gradient
/// ascent on an objective is expressed by accumulating the gradient of its
/// negation. Tied storages are updated once.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerConfig config, std::vector<std::string> prefixes)
      : config_(config), prefixes_(std::move(prefixes)) {}

  void step(const NetworkParams<float>& params);

  const OptimizerConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& prefixes() const noexcept { return prefixes_; }
  std::int64_t steps() const noexcept { return steps_; }

  /// Adam moment buffers keyed by canonical parameter name.
  const std::map<std::string, Tensor<float>>& first_moments() const { return m_; }
  const std::map<std::string, Tensor<float>>& second_moments() const { return v_; }
  void restore(std::int64_t steps, std::map<std::string, Tensor<float>> m,
               std::map<std::string, Tensor<float>> v) {
    steps_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  OptimizerConfig config_;
  std::vector<std::string> prefixes_;
  std::int64_t steps_ = 0;
  std::map<std::string, Tensor<float>> m_;
  std::map<std::string, Tensor<float>> v_;
};

}  // namespace crossgan
