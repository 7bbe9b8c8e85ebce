#include <gtest/gtest.h>

#include <cmath>

#include "crossgan/error.hpp"
#include "crossgan/layers.hpp"
#include "crossgan/nets.hpp"
#include "crossgan/params.hpp"
#include "crossgan/rng.hpp"
#include "support.hpp"

namespace crossgan {
namespace {

using testing::tiny_discriminator;
using testing::tiny_generator;
using testing::uniform_tensor;

TEST(Rng, SameSeedSameStream) {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  Rng c(8);
  EXPECT_NE(Rng(7).next_u64(), c.next_u64());
}

TEST(Rng, StateRoundTrip) {
  Rng a(3);
  a.normal();
  Rng b;
  b.set_state(a.state());
  EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, BelowStaysInRange) {
  Rng r(1);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(r.below(7), 7u);
}

TEST(Tensor, ConcatAndSlice) {
  Tensor<float> a({2, 3}, 1.0f), b({1, 3}, 2.0f);
  const auto c = concat_batch({&a, &b});
  ASSERT_EQ(c.shape(), (Shape{3, 3}));
  EXPECT_EQ(slice_batch(c, 2, 3), b);
  EXPECT_EQ(slice_batch(c, 0, 2), a);
}

TEST(Params, AliasSharesStorage) {
  NetworkParams<float> a, b;
  a.add("w", Tensor<float>({2}, 0.0f));
  b.add("w", Tensor<float>({2}, 5.0f));
  auto tied = tie_parameters(a, b, {"w"});
  tied.first.at("w").value[0] = 3.0f;
  EXPECT_EQ(tied.second.at("w").value[0], 3.0f);
  EXPECT_EQ(tied.tied, std::vector<std::string>{"w"});
}

TEST(Params, TieShapeMismatchNamesParameter) {
  NetworkParams<float> a, b;
  a.add("up1.weight", Tensor<float>({2, 2}));
  b.add("up1.weight", Tensor<float>({3, 2}));
  try {
    tie_parameters(a, b, {"up1."});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("up1.weight"), std::string::npos);
  }
}

TEST(Params, TieMissingNameIsFatal) {
  NetworkParams<float> a, b;
  a.add("x", Tensor<float>({1}));
  EXPECT_THROW(tie_parameters(a, b, {"x"}), ConfigError);
  EXPECT_THROW(tie_parameters(a, b, {"nothing"}), ConfigError);
}

TEST(Params, CloneKeepsAliasingButNotStorage) {
  NetworkParams<float> p;
  p.add("a", Tensor<float>({1}, 1.0f));
  p.add_handle("b", p.handle("a"));
  auto c = p.clone();
  EXPECT_TRUE(c.aliased("a", "b"));
  c.at("a").value[0] = 9.0f;
  EXPECT_EQ(p.at("a").value[0], 1.0f);
}

TEST(Params, TrainableStorageVisitsTiedOnce) {
  auto params = build_cogan({tiny_generator(), tiny_discriminator(), {}, {}}, 1);
  const auto gen = params.trainable_storage({"Gs/", "Gl/"});
  std::set<const Param<float>*> distinct;
  for (const auto& [name, h] : gen) EXPECT_TRUE(distinct.insert(h.get()).second) << name;
  EXPECT_LT(gen.size(), params.trainable_storage({"Gs/"}).size() * 2);
}

TEST(GradientReversal, ForwardIsIdentity) {
  const Tensor<double> x({2}, std::vector<double>{1.5, -2.0});
  EXPECT_EQ(gradient_reversal(x), x);
  GradientReversal<double> layer;
  LayerCache<double> cache;
  EXPECT_EQ(layer.forward(x, Mode::kTrain, cache), x);
}

TEST(GradientReversal, BackwardNegates) {
  const Tensor<double> g({2}, std::vector<double>{0.3, -0.1});
  const Tensor<double> expected({2}, std::vector<double>{-0.3, 0.1});
  EXPECT_EQ(gradient_reversal_backward(g), expected);
  GradientReversal<double> layer;
  LayerCache<double> cache;
  layer.forward(g, Mode::kTrain, cache);
  EXPECT_EQ(layer.backward(g, cache), expected);
}

TEST(GradientReversal, ComposedGradientIsNegatedFiniteDifference) {
  // f(y) = sum_i a_i y_i^2 + b_i y_i, evaluated at y = reversal(x).
  Rng rng(11);
  const std::size_t n = 6;
  std::vector<double> a(n), b(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform(-2, 2);
    b[i] = rng.uniform(-2, 2);
    x[i] = rng.uniform(-2, 2);
  }
  auto f = [&](const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * y[i] * y[i] + b[i] * y[i];
    return s;
  };
  Tensor<double> upstream({n});
  for (std::size_t i = 0; i < n; ++i) upstream[i] = 2 * a[i] * x[i] + b[i];
  const auto grad = gradient_reversal_backward(upstream);
  for (std::size_t i = 0; i < n; ++i) {
    auto xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    const double fd = (f(xp) - f(xm)) / 2e-6;
    EXPECT_LT(testing::relative_error(grad[i], -fd), 1e-4);
  }
}

TEST(Layers, BatchNormInferenceIsBatchIndependent) {
  auto params = build_discriminator(tiny_discriminator(), 3).cast<double>();
  auto net = trunk_network(tiny_discriminator(), params);
  const auto x = uniform_tensor<double>({4, 3, 16, 16}, 5);
  net.forward(x, Mode::kTrain);  // move running statistics away from the init
  const auto full = net.run(x, Mode::kInference);
  const auto one = net.run(slice_batch(x, 1, 2), Mode::kInference);
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_DOUBLE_EQ(one[i], full.row(1)[i]);
}

TEST(Layers, FrozenModeLeavesRunningStatistics) {
  auto params = build_discriminator(tiny_discriminator(), 3);
  auto net = trunk_network(tiny_discriminator(), params);
  const auto before = params.clone();
  net.forward(uniform_tensor<float>({2, 3, 16, 16}, 1), Mode::kTrainFrozen);
  for (const auto& name : params.names()) {
    EXPECT_EQ(params.at(name).value, before.at(name).value) << name;
  }
  net.forward(uniform_tensor<float>({2, 3, 16, 16}, 1), Mode::kTrain);
  EXPECT_NE(params.at("down1.bn.running_mean").value, before.at("down1.bn.running_mean").value);
}

TEST(Nets, LadderArithmetic) {
  for (int res : {16, 64, 128, 256}) {
    GeneratorSpec g{16, res, 8};
    DiscriminatorSpec d{res, 8};
    EXPECT_EQ(4 << g.upsampling_blocks(), res);
    EXPECT_EQ(d.downsampling_blocks(), g.upsampling_blocks());
    EXPECT_EQ(g.block_channels().back(), 3);
  }
  EXPECT_THROW((GeneratorSpec{16, 48, 8}.validate()), ConfigError);
  EXPECT_THROW((GeneratorSpec{16, 4, 8}.validate()), ConfigError);
  EXPECT_THROW(build_generator({16, 96, 8}, 1), ConfigError);
}

TEST(Nets, DefaultGeneratorSizes) {
  const GeneratorSpec spec;
  EXPECT_EQ(spec.z_dim, 1024);
  EXPECT_EQ(spec.base_channels, 128);
}

TEST(Nets, GeneratorOutputsStayInTanhRange) {
  auto params = build_generator(tiny_generator(), 2);
  Generator<float> g(tiny_generator(), params);
  const auto z = uniform_tensor<float>({100, 8}, 9);
  const auto out = g.generate(z, Mode::kInference);
  ASSERT_EQ(out.shape(), (Shape{100, 3, 16, 16}));
  for (float v : out.storage()) {
    ASSERT_GE(v, -1.0f);
    ASSERT_LE(v, 1.0f);
  }
}

TEST(Nets, GeneratorRejectsWrongZWidth) {
  auto params = build_generator(tiny_generator(), 2);
  Generator<float> g(tiny_generator(), params);
  EXPECT_THROW(g.generate(Tensor<float>({1, 7}), Mode::kInference), ConfigError);
}

TEST(Nets, DiscriminatorShapesAndRange) {
  const DiscriminatorSpec spec{64, 4};
  auto params = build_discriminator(spec, 4);
  Discriminator<float> d(spec, params, params);
  const auto pass = d.forward(uniform_tensor<float>({5, 3, 64, 64}, 3), Mode::kInference);
  EXPECT_EQ(pass.probs.size(), 5u);
  EXPECT_EQ(pass.features().shape(), (Shape{5, static_cast<std::size_t>(spec.feature_width())}));
  for (float p : pass.probs) {
    EXPECT_GT(p, 0.0f);
    EXPECT_LT(p, 1.0f);
  }
}

TEST(Nets, SameSeedSameParameters) {
  const auto a = build_discriminator(tiny_discriminator(), 42);
  const auto b = build_discriminator(tiny_discriminator(), 42);
  const auto c = build_discriminator(tiny_discriminator(), 43);
  for (const auto& name : a.names()) EXPECT_EQ(a.at(name).value, b.at(name).value);
  EXPECT_NE(a.at("down1.weight").value, c.at("down1.weight").value);
}

TEST(Nets, InitializationStatistics) {
  const auto p = build_generator({64, 64, 32}, 5);
  const auto& w = p.at("proj.weight").value;
  double sum = 0, sq = 0;
  for (float v : w.storage()) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(w.size());
  EXPECT_NEAR(sum / n, 0.0, 1e-3);
  EXPECT_NEAR(std::sqrt(sq / n), 0.02, 1e-3);
  for (float v : p.at("proj.bn.gamma").value.storage()) EXPECT_EQ(v, 1.0f);
  for (float v : p.at("proj.bn.beta").value.storage()) EXPECT_EQ(v, 0.0f);
}

TEST(Nets, DannForwardExposesFourOutputs) {
  const auto spec = testing::tiny_dann();
  auto params = build_dann(spec, 1);
  DannModel<float> m(spec, params);
  const auto out = m.forward(uniform_tensor<float>({3, 3, 16, 16}, 1), Mode::kInference);
  EXPECT_EQ(out.realness.size(), 3u);
  EXPECT_EQ(out.domain_logits.shape(), (Shape{3, 2}));
  EXPECT_EQ(out.trunk_features.shape(),
            (Shape{3, static_cast<std::size_t>(spec.discriminator.feature_width())}));
  EXPECT_EQ(out.classifier_features.shape(), (Shape{3, 6}));
}

TEST(Nets, DannGroupsAreDisjoint) {
  auto params = build_dann(testing::tiny_dann(), 1);
  std::size_t total = 0;
  for (const char* g : {kGroupGs, kGroupGl, kGroupTrunk, kGroupRealness, kGroupClassifier}) {
    const auto names = params.names_with_prefix(g);
    EXPECT_FALSE(names.empty()) << g;
    total += names.size();
  }
  EXPECT_EQ(total, params.size());
}

TEST(Nets, DannPerturbationIsolation) {
  const auto spec = testing::tiny_dann();
  auto params = build_dann(spec, 1).cast<double>();
  DannModel<double> m(spec, params);
  const auto x = uniform_tensor<double>({2, 3, 16, 16}, 4);
  const auto base = m.forward(x, Mode::kInference);

  params.at("c/fc2.weight").value[0] += 0.5;
  const auto after_c = m.forward(x, Mode::kInference);
  EXPECT_EQ(after_c.realness, base.realness);
  EXPECT_NE(after_c.domain_logits, base.domain_logits);
  params.at("c/fc2.weight").value[0] -= 0.5;

  params.at("a/down1.weight").value[0] += 0.5;
  const auto after_a = m.forward(x, Mode::kInference);
  EXPECT_NE(after_a.realness, base.realness);
  EXPECT_NE(after_a.domain_logits, base.domain_logits);
}

TEST(Nets, HeadIsolationGradients) {
  // d(realness)/d(theta_c) = 0 and d(domain logits)/d(theta_f) = 0 exactly.
  const auto spec = testing::tiny_dann();
  auto params = build_dann(spec, 1).cast<double>();
  DannModel<double> m(spec, params);
  const auto x = uniform_tensor<double>({2, 3, 16, 16}, 4);

  params.zero_grad();
  auto pass = m.discriminator().forward(x, Mode::kTrain);
  m.discriminator().backward(pass, {1.0, 1.0});
  for (const auto& n : params.names_with_prefix(kGroupClassifier)) {
    for (double g : params.at(n).grad.storage()) ASSERT_EQ(g, 0.0) << n;
  }

  params.zero_grad();
  auto trunk = m.discriminator().trunk_forward(x, Mode::kTrain);
  auto cls = m.classifier().forward(trunk.output, Mode::kTrain);
  m.discriminator().trunk_backward(trunk, m.classifier().backward(cls, Tensor<double>({2, 2}, 1.0)));
  for (const auto& n : params.names_with_prefix(kGroupRealness)) {
    for (double g : params.at(n).grad.storage()) ASSERT_EQ(g, 0.0) << n;
  }
}

TEST(Nets, CoganDefaultTies) {
  const auto g = CoupledSpec::default_generator_ties({8, 64, 8});
  EXPECT_EQ(g, (std::vector<std::string>{"proj.", "up1.", "up2."}));
  const auto d = CoupledSpec::default_discriminator_ties({64, 8});
  EXPECT_EQ(d, (std::vector<std::string>{"down4.", "head."}));
  auto params = build_cogan({tiny_generator(), tiny_discriminator(), {}, {}}, 1);
  EXPECT_TRUE(params.aliased("Gs/proj.weight", "Gl/proj.weight"));
  EXPECT_FALSE(params.aliased("Gs/out.weight", "Gl/out.weight"));
  EXPECT_FALSE(params.aliased("Gs/up1.weight", "Gl/up1.weight"));
  EXPECT_TRUE(params.aliased("Ds/down2.weight", "Dl/down2.weight"));
  EXPECT_TRUE(params.aliased("Ds/head.weight", "Dl/head.weight"));
  EXPECT_FALSE(params.aliased("Ds/down1.weight", "Dl/down1.weight"));
}

TEST(Nets, TiedUpdateAppliesSummedGradient) {
  auto params = build_cogan({tiny_generator(), tiny_discriminator(), {}, {}}, 1);
  auto& tied = params.at("Gs/proj.weight");
  const auto before = tied.value;
  params.zero_grad();
  // Two domain contributions accumulate into the one storage.
  for (auto& g : params.at("Gs/proj.weight").grad.storage()) g += 0.25f;
  for (auto& g : params.at("Gl/proj.weight").grad.storage()) g += 0.5f;
  for (std::size_t i = 0; i < tied.value.size(); ++i) {
    tied.value[i] -= 0.1f * tied.grad[i];
  }
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_FLOAT_EQ(params.at("Gl/proj.weight").value[i], before[i] - 0.1f * 0.75f);
  }
}

}  // namespace
}  // namespace crossgan
