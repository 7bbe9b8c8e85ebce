#include "crossgan/toy.hpp"

#include <cmath>
#include <numbers>

#include "crossgan/error.hpp"
#include "crossgan/losses.hpp"
#include "crossgan/nets.hpp"
#include "crossgan/optim.hpp"
#include "crossgan/rng.hpp"

namespace crossgan {

double RingMixture::center_x(int k) const {
  return radius * std::cos(2.0 * std::numbers::pi * k / modes);
}

double RingMixture::center_y(int k) const {
  return radius * std::sin(2.0 * std::numbers::pi * k / modes);
}

Tensor<float> RingMixture::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  Tensor<float> out({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(modes)));
    out[2 * i] = static_cast<float>(center_x(k) + stddev * rng.normal());
    out[2 * i + 1] = static_cast<float>(center_y(k) + stddev * rng.normal());
  }
  return out;
}

ModeCoverage mode_coverage(const RingMixture& ring, const Tensor<float>& points) {
  ModeCoverage cov;
  cov.counts.assign(static_cast<std::size_t>(ring.modes), 0);
  const std::size_t n = points.dim(0);
  const double reach = 3.0 * ring.stddev;
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < ring.modes; ++k) {
      const double dx = points[2 * i] - ring.center_x(k);
      const double dy = points[2 * i + 1] - ring.center_y(k);
      if (std::sqrt(dx * dx + dy * dy) <= reach) ++cov.counts[static_cast<std::size_t>(k)];
    }
  }
  for (int c : cov.counts) {
    if (c >= 0.02 * static_cast<double>(n)) ++cov.covered;
  }
  return cov;
}

ToyResult train_toy(const ToyConfig& c) {
  if (c.steps < 1 || c.batch_size < 2 || c.z_dim < 1 || c.hidden < 1) {
    throw ConfigError("toy configuration needs positive steps, batch, z_dim and hidden width");
  }
  constexpr double kInitStddev = 0.1;
  NetworkParams<float> params(c.seed);
  params.adopt("G/", build_mlp({c.z_dim, c.hidden, c.hidden, 2}, derive_seed(c.seed, 1), kInitStddev));
  params.adopt("D/", build_mlp({2, c.hidden, c.hidden, 1}, derive_seed(c.seed, 2), kInitStddev));
  auto gen = mlp_network(params.view("G/"), 3, false);
  auto disc = mlp_network(params.view("D/"), 3, true);

  OptimizerConfig oc;
  oc.learning_rate = c.learning_rate;
  oc.beta1 = c.beta1;
  oc.beta2 = c.beta2;
  Optimizer opt_d(oc, {"D/"}), opt_g(oc, {"G/"});

  Rng z_rng(derive_seed(c.seed, 3));
  const std::uint64_t data_seed = derive_seed(c.seed, 4);
  const auto b = static_cast<std::size_t>(c.batch_size);
  auto draw_z = [&](std::size_t n) {
    Tensor<float> z({n, static_cast<std::size_t>(c.z_dim)});
    for (auto& v : z.storage()) v = static_cast<float>(z_rng.normal());
    return z;
  };
  auto column = [](const Tensor<float>& t) { return std::vector<float>(t.storage()); };

  ToyResult result;
  for (int step = 0; step < c.steps; ++step) {
    const Tensor<float> real = c.data.sample(b, derive_seed(data_seed, static_cast<std::uint64_t>(step)));
    const Tensor<float> z = draw_z(b);

    params.zero_grad();
    const Tensor<float> fake = gen.run(z, Mode::kTrain);
    const auto rt = disc.forward(real, Mode::kTrain);
    const auto ft = disc.forward(fake, Mode::kTrain);
    const auto rl = column(rt.output), fl = column(ft.output);
    std::vector<double> rp, fp;
    for (float l : rl) rp.push_back(sigmoid(static_cast<double>(l)));
    for (float l : fl) fp.push_back(sigmoid(static_cast<double>(l)));
    const auto dl = gan_loss(rp, fp);
    if (!std::isfinite(dl.value)) throw NumericalError("non-finite toy discriminator loss", step);
    disc.backward(rt, Tensor<float>({b, 1}, grad::log_score<float>(rl, -1.0)));
    disc.backward(ft, Tensor<float>({b, 1}, grad::log_one_minus_score<float>(fl, -1.0)));
    opt_d.step(params);

    params.zero_grad();
    const auto gt = gen.forward(z, Mode::kTrain);
    const auto dt = disc.forward(gt.output, Mode::kTrain);
    const auto gl = column(dt.output);
    std::vector<double> gp;
    for (float l : gl) gp.push_back(sigmoid(static_cast<double>(l)));
    const auto g_loss = generator_loss(gp, true);
    if (!std::isfinite(g_loss.value)) throw NumericalError("non-finite toy generator loss", step);
    gen.backward(gt, disc.backward(dt, Tensor<float>({b, 1}, grad::log_score<float>(gl, -1.0))));
    opt_g.step(params);

    result.final_discriminator_loss = dl.value;
    result.final_generator_loss = g_loss.value;
  }
  result.samples = gen.run(draw_z(static_cast<std::size_t>(c.eval_samples)), Mode::kInference);
  result.coverage = mode_coverage(c.data, result.samples);
  return result;
}

}  // namespace crossgan
