#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "crossgan/nets.hpp"
#include "crossgan/params.hpp"
#include "crossgan/rng.hpp"
#include "crossgan/tensor.hpp"

namespace crossgan::testing {

/// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "crossgan") {
    static std::uint64_t counter = 0;
    std::random_device entropy;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(++counter) + "_" +
             std::to_string(entropy()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// The resolution-16 test networks.
inline GeneratorSpec tiny_generator() { return {8, 16, 4}; }
inline DiscriminatorSpec tiny_discriminator() { return {16, 4}; }
inline DannSpec tiny_dann() { return {tiny_generator(), tiny_discriminator(), 6, 2}; }

template <typename T>
Tensor<T> uniform_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.storage()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

/// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheck {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst = 0.0;
  std::string worst_name;
};

/// Compares `sign * grad` left by `accumulate` against central differences
/// of `loss` on up to `coords` random coordinates of the trainable entries
/// under `prefix`.
inline GradCheck check_gradients(NetworkParams<double>& params, const std::string& prefix,
                                 const std::function<void()>& accumulate,
                                 const std::function<double()>& loss, double sign,
                                 std::size_t coords, std::uint64_t seed, double tolerance,
                                 double step = 1e-5) {
  params.zero_grad();
  accumulate();
  const auto storages = params.trainable_storage({prefix});
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t s = 0; s < storages.size(); ++s) {
    for (std::size_t i = 0; i < storages[s].second->value.size(); ++i) all.emplace_back(s, i);
  }
  Rng rng(seed);
  for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng.below(i)]);
  if (all.size() > coords) all.resize(coords);

  GradCheck out;
  for (const auto& [s, i] : all) {
    auto& p = *storages[s].second;
    const double analytic = sign * p.grad[i];
    const double saved = p.value[i];
    p.value[i] = saved + step;
    const double up = loss();
    p.value[i] = saved - step;
    const double down = loss();
    p.value[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic, numeric);
    ++out.checked;
    if (err > tolerance) ++out.failed;
    if (err > out.worst) {
      out.worst = err;
      out.worst_name = storages[s].first + "[" + std::to_string(i) + "]";
    }
  }
  return out;
}

}  // namespace crossgan::testing
