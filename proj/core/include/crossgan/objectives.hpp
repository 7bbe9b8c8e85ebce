#pragma once

#include <span>
#include <vector>

#include "crossgan/layers.hpp"
#include "crossgan/losses.hpp"
#include "crossgan/nets.hpp"

namespace crossgan {

// Gradient accumulators for the adversarial objectives. Each function runs
// the forward passes, returns the loss value and adds the gradient of the
// quantity its player minimizes into the parameters' grad buffers; callers
// zero gradients and apply the optimizer. Batch-norm running statistics are
// updated only by passes over real images.

/// Discriminator player of a single GAN: accumulates d(-L)/d(theta_f).
template <typename T>
LossReport discriminator_gradients(Generator<T>& g, Discriminator<T>& d, const Tensor<T>& real,
                                   const Tensor<T>& z);

/// Generator player: accumulates the gradient of the generator objective
/// (see generator_loss) into g. Gradients also land in d's buffers.
template <typename T>
LossReport generator_gradients(Generator<T>& g, Discriminator<T>& d, const Tensor<T>& z,
                               bool non_saturating, Mode generator_mode = Mode::kTrain);

/// L evaluated without touching any state.
template <typename T>
LossReport evaluate_gan_value(Generator<T>& g, Discriminator<T>& d, const Tensor<T>& real,
                              const Tensor<T>& z);

/// Step 3 of the domain-adaptation update: accumulates d(-L1)/d(theta_a, theta_f)
/// over the concatenated real (S then L) and fake (Gs then Gl) batches.
template <typename T>
LossReport dann_discriminator_gradients(DannModel<T>& m, const Tensor<T>& real_s,
                                        const Tensor<T>& real_l, const Tensor<T>& z_s,
                                        const Tensor<T>& z_l);

/// Step 4: accumulates the generator objective gradient into both generators.
/// Terms "generator_s" and "generator_l".
template <typename T>
LossReport dann_generator_gradients(DannModel<T>& m, const Tensor<T>& z_s, const Tensor<T>& z_l,
                                    bool non_saturating);

/// Steps 5 and 6: accumulates dL2/d(theta_a, theta_c) for images with the
/// given domain labels. `real_images` selects whether the trunk batch-norm
/// running statistics are updated.
template <typename T>
LossReport classifier_gradients(DannModel<T>& m, const Tensor<T>& images, std::span<const int> labels,
                                bool real_images);

/// L1 evaluated without touching any state.
template <typename T>
LossReport evaluate_l1(DannModel<T>& m, const Tensor<T>& real_s, const Tensor<T>& real_l,
                       const Tensor<T>& z_s, const Tensor<T>& z_l);

/// L2 evaluated without touching any state (batch statistics).
template <typename T>
LossReport evaluate_l2(DannModel<T>& m, const Tensor<T>& images, std::span<const int> labels);

/// Labels 0 for the first `n_s` rows and 1 for the next `n_l`.
std::vector<int> domain_labels(std::size_t n_s, std::size_t n_l);

}  // namespace crossgan
