#include "crossgan/optim.hpp"

#include <cmath>

namespace crossgan {

void Optimizer::step(const NetworkParams<float>& params) {
  ++steps_;
  const auto storages = params.trainable_storage(prefixes_);
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kSgd) {
    for (const auto& [name, h] : storages) {
      auto& w = h->value.storage();
      const auto& g = h->grad.storage();
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = static_cast<float>(w[i] - lr * g[i]);
      }
    }
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (const auto& [name, h] : storages) {
    auto& m = m_.try_emplace(name, h->value.shape()).first->second;
    auto& v = v_.try_emplace(name, h->value.shape()).first->second;
    auto& w = h->value.storage();
    const auto& g = h->grad.storage();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      m[i] = static_cast<float>(b1 * m[i] + (1.0 - b1) * gi);
      v[i] = static_cast<float>(b2 * v[i] + (1.0 - b2) * gi * gi);
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] = static_cast<float>(w[i] - lr * mhat / (std::sqrt(vhat) + config_.epsilon));
    }
  }
}

}  // namespace crossgan
