#include <benchmark/benchmark.h>

#include "crossgan/nets.hpp"
#include "crossgan/objectives.hpp"
#include "crossgan/rng.hpp"

namespace {

using namespace crossgan;

Tensor<float> uniform(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t(std::move(shape));
  for (auto& v : t.storage()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

void BM_GeneratorForward(benchmark::State& state) {
  const GeneratorSpec spec{64, static_cast<int>(state.range(0)), 16};
  auto params = build_generator(spec, 1);
  Generator<float> g(spec, params);
  const auto z = uniform({8, 64}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(g.generate(z, Mode::kInference));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_GeneratorForward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DiscriminatorForward(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const DiscriminatorSpec spec{res, 16};
  auto params = build_discriminator(spec, 3);
  Discriminator<float> d(spec, params, params);
  const auto x = uniform({8, 3, static_cast<std::size_t>(res), static_cast<std::size_t>(res)}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(d.forward(x, Mode::kInference).probs);
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_DiscriminatorForward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GanGradients(benchmark::State& state) {
  const GeneratorSpec gs{32, 32, 8};
  const DiscriminatorSpec ds{32, 8};
  NetworkParams<float> params;
  params.adopt("G/", build_generator(gs, 5));
  params.adopt("D/", build_discriminator(ds, 6));
  Generator<float> g(gs, params.view("G/"));
  const auto dview = params.view("D/");
  Discriminator<float> d(ds, dview, dview);
  const auto real = uniform({8, 3, 32, 32}, 7);
  const auto z = uniform({8, 32}, 8);
  for (auto _ : state) {
    params.zero_grad();
    benchmark::DoNotOptimize(discriminator_gradients(g, d, real, z).value);
    benchmark::DoNotOptimize(generator_gradients(g, d, z, true).value);
  }
}
BENCHMARK(BM_GanGradients)->Unit(benchmark::kMillisecond);

}  // namespace
