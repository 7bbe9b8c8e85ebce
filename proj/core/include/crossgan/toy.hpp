#pragma once

#include <cstdint>
#include <vector>

#include "crossgan/tensor.hpp"

namespace crossgan {

/// Eight isotropic Gaussians evenly spaced on a circle.
struct RingMixture {
  int modes = 8;
  double radius = 2.0;
  double stddev = 0.02;

  double center_x(int k) const;
  double center_y(int k) const;
  /// (n, 2) draws, mode chosen uniformly per draw.
  Tensor<float> sample(std::size_t n, std::uint64_t seed) const;
};

/// Fully connected GAN on 2-D points.
struct ToyConfig {
  RingMixture data;
  int steps = 5000;
  int batch_size = 256;
  int z_dim = 16;
  int hidden = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::uint64_t seed = 1;
  int eval_samples = 1000;
};

struct ModeCoverage {
  std::vector<int> counts;  ///< samples within 3 stddev of each center
  int covered = 0;          ///< modes holding >= 2% of the samples
};

/// A mode is covered when at least 2% of the points lie within 3 stddev of its center.
ModeCoverage mode_coverage(const RingMixture& ring, const Tensor<float>& points);

struct ToyResult {
  Tensor<float> samples;  ///< (eval_samples, 2) generator output after training
  ModeCoverage coverage;
  double final_discriminator_loss = 0.0;
  double final_generator_loss = 0.0;
};

ToyResult train_toy(const ToyConfig& config);

}  // namespace crossgan
