#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crossgan/checkpoint.hpp"
#include "crossgan/config.hpp"
#include "crossgan/corpus.hpp"
#include "crossgan/embed.hpp"
#include "crossgan/layers.hpp"
#include "crossgan/losses.hpp"
#include "crossgan/nets.hpp"
#include "crossgan/objectives.hpp"
#include "crossgan/runtime.hpp"
#include "crossgan/toy.hpp"
#include "crossgan/train.hpp"
#include "support.hpp"

namespace crossgan {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;
using testing::uniform_tensor;

constexpr double kGradTolerance = 1e-3;
constexpr std::size_t kGradCoordinates = 60;
constexpr double kFiniteDifferenceStep = 1e-6;
constexpr double kReversalTolerance = 1e-4;
constexpr double kLossTolerance = 1e-5;
constexpr int kTyingSteps = 100;
constexpr int kVariantSteps = 50;
constexpr int kLazyWarmup = 5;
constexpr double kAccuracyTarget = 0.9;
constexpr int kClassifierIterations = 500;
constexpr int kToyModesRequired = 6;
constexpr int kSeedsRequired = 4;
constexpr int kSeeds = 5;
constexpr double kDiversityTolerance = 1e-6;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Snapshot = std::map<std::string, Tensor<float>>;

Snapshot trainable(const NetworkParams<float>& p, const std::string& prefix = "") {
  Snapshot out;
  for (const auto& name : p.names_with_prefix(prefix)) {
    if (p.at(name).trainable) out[name] = p.at(name).value;
  }
  return out;
}

bool identical(const Snapshot& a, const Snapshot& b) {
  for (const auto& [name, t] : a) {
    if (!(b.at(name) == t)) return false;
  }
  return true;
}

TrainConfig tiny_config(Regime regime) {
  TrainConfig c;
  c.regime = regime;
  c.resolution = 16;
  c.z_dim = 8;
  c.generator_channels = 4;
  c.discriminator_channels = 4;
  c.classifier_width = 6;
  c.batch_size = 4;
  c.allow_any_resolution = true;
  c.iterations = 2;
  c.sample_count = 4;
  return c;
}

Tensor<float> images(std::size_t n, std::uint64_t seed) { return uniform_tensor<float>({n, 3, 16, 16}, seed); }
Tensor<float> noise(std::size_t n, std::uint64_t seed) { return uniform_tensor<float>({n, 8}, seed); }

void dann_steps(Trainer& t, int n, std::uint64_t seed) {
  for (int i = 0; i < n; ++i) {
    const std::uint64_t s = seed + 4 * static_cast<std::uint64_t>(i);
    t.dann_step(images(4, s), images(4, s + 1), noise(4, s + 2), noise(4, s + 3));
  }
}

std::vector<double> probs(const std::vector<double>& p, std::size_t b, std::size_t e) {
  return {p.begin() + static_cast<std::ptrdiff_t>(b), p.begin() + static_cast<std::ptrdiff_t>(e)};
}

void record_check(Outcome& o, const std::string& group, const testing::GradCheck& r) {
  o.detail << group << " " << r.checked << " coords worst " << r.worst << "; ";
  o.require(r.checked >= 50 && r.failed == 0, group + " gradient (worst " + r.worst_name + ")");
}

// 1 -------------------------------------------------------------------------
Outcome gradient_correctness() {
  Outcome o;
  const auto gspec = testing::tiny_generator();
  const auto dspec = testing::tiny_discriminator();

  NetworkParams<double> gan;
  gan.adopt("G/", build_generator(gspec, 1).cast<double>());
  gan.adopt("D/", build_discriminator(dspec, 2).cast<double>());
  Generator<double> g(gspec, gan.view("G/"));
  const auto dview = gan.view("D/");
  Discriminator<double> d(dspec, dview, dview);
  const auto real = uniform_tensor<double>({4, 3, 16, 16}, 3);
  const auto z = uniform_tensor<double>({4, 8}, 4);

  record_check(o, "L/D",
               testing::check_gradients(
                   gan, "D/", [&] { discriminator_gradients(g, d, real, z); },
                   [&] { return evaluate_gan_value(g, d, real, z).value; }, -1.0, kGradCoordinates, 5,
                   kGradTolerance, kFiniteDifferenceStep));
  record_check(o, "L/G",
               testing::check_gradients(
                   gan, "G/", [&] { generator_gradients(g, d, z, true); },
                   [&] {
                     const auto pass = d.forward(g.generate(z, Mode::kTrainFrozen), Mode::kTrainFrozen);
                     return generator_loss(pass.probs, true).value;
                   },
                   1.0, kGradCoordinates, 6, kGradTolerance, kFiniteDifferenceStep));

  const auto spec = testing::tiny_dann();
  auto params = build_dann(spec, 7).cast<double>();
  DannModel<double> m(spec, params);
  const auto rs = uniform_tensor<double>({3, 3, 16, 16}, 8);
  const auto rl = uniform_tensor<double>({3, 3, 16, 16}, 9);
  const auto zs = uniform_tensor<double>({3, 8}, 10);
  const auto zl = uniform_tensor<double>({3, 8}, 11);

  auto l1_ascent = [&] { dann_discriminator_gradients(m, rs, rl, zs, zl); };
  auto l1_value = [&] { return evaluate_l1(m, rs, rl, zs, zl).value; };
  record_check(o, "L1/a", testing::check_gradients(params, kGroupTrunk, l1_ascent, l1_value, -1.0,
                                                   kGradCoordinates, 12, kGradTolerance, kFiniteDifferenceStep));
  record_check(o, "L1/f", testing::check_gradients(params, kGroupRealness, l1_ascent, l1_value, -1.0,
                                                   kGradCoordinates, 13, kGradTolerance, kFiniteDifferenceStep));

  auto generator_objective = [&] {
    const auto fs_ = m.generator(0).generate(zs, Mode::kTrainFrozen);
    const auto fl = m.generator(1).generate(zl, Mode::kTrainFrozen);
    const auto pass = m.discriminator().forward(concat_batch({&fs_, &fl}), Mode::kTrainFrozen);
    const std::size_t n = zs.dim(0);
    return generator_loss(probs(pass.probs, 0, n), true).value +
           generator_loss(probs(pass.probs, n, pass.probs.size()), true).value;
  };
  auto generator_descent = [&] { dann_generator_gradients(m, zs, zl, true); };
  record_check(o, "L1/Gs", testing::check_gradients(params, kGroupGs, generator_descent, generator_objective,
                                                    1.0, kGradCoordinates, 14, kGradTolerance, kFiniteDifferenceStep));
  record_check(o, "L1/Gl", testing::check_gradients(params, kGroupGl, generator_descent, generator_objective,
                                                    1.0, kGradCoordinates, 15, kGradTolerance, kFiniteDifferenceStep));

  const auto both = concat_batch({&rs, &rl});
  const auto labels = domain_labels(3, 3);
  auto l2_descent = [&] { classifier_gradients(m, both, labels, true); };
  auto l2_value = [&] { return evaluate_l2(m, both, labels).value; };
  record_check(o, "L2/a", testing::check_gradients(params, kGroupTrunk, l2_descent, l2_value, 1.0,
                                                   kGradCoordinates, 16, kGradTolerance, kFiniteDifferenceStep));
  record_check(o, "L2/c", testing::check_gradients(params, kGroupClassifier, l2_descent, l2_value, 1.0,
                                                   kGradCoordinates, 17, kGradTolerance, kFiniteDifferenceStep));
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome gradient_reversal_check() {
  Outcome o;
  const auto x = uniform_tensor<double>({3, 5}, 21);
  const auto up = uniform_tensor<double>({3, 5}, 22);
  GradientReversal<double> layer;
  LayerCache<double> cache;
  o.require(layer.forward(x, Mode::kTrain, cache) == x && gradient_reversal(x) == x, "forward identity");
  Tensor<double> negated = up;
  for (auto& v : negated.storage()) v = -v;
  o.require(layer.backward(up, cache) == negated && gradient_reversal_backward(up) == negated,
            "backward negation");

  // f(y) = sum a_i y_i^2 + b_i sin(y_i) composed with y = reversal(x)
  const auto a = uniform_tensor<double>({15}, 23);
  const auto b = uniform_tensor<double>({15}, 24);
  auto f = [&](const Tensor<double>& in) {
    const auto y = gradient_reversal(in);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += a[i] * y[i] * y[i] + b[i] * std::sin(y[i]);
    return s;
  };
  Tensor<double> upstream({3, 5});
  for (std::size_t i = 0; i < x.size(); ++i) upstream[i] = 2 * a[i] * x[i] + b[i] * std::cos(x[i]);
  const auto grad = gradient_reversal_backward(upstream);
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    const double fd = (f(xp) - f(xm)) / 2e-6;
    worst = std::max(worst, testing::relative_error(grad[i], -fd));
  }
  o.detail << "composed worst relative error " << worst;
  o.require(worst < kReversalTolerance, "composed finite difference");
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome loss_values() {
  Outcome o;
  const std::vector<double> half{0.5};
  auto check = [&](const std::string& what, double got, double oracle) {
    o.detail << what << "=" << format_double(got) << " ";
    o.require(std::abs(got - oracle) <= kLossTolerance, what);
  };
  check("L(0.5)", gan_loss(half, half).value, 2 * std::log(0.5));
  check("L2(equal)", da_l2(Tensor<double>({1, 2}, std::vector<double>{0.3, 0.3}), std::vector<int>{1}).value,
        std::log(2.0));
  check("L2(2,0)", da_l2(Tensor<double>({1, 2}, std::vector<double>{2, 0}), std::vector<int>{0}).value,
        std::log1p(std::exp(-2.0)));
  check("L(hand)",
        gan_loss(std::vector<double>{0.9, 0.8}, std::vector<double>{0.2, 0.1}).value,
        (std::log(0.9) + std::log(0.8)) / 2 + (std::log(0.8) + std::log(0.9)) / 2);
  const double singleton = std::log(0.9) + std::log(0.7) + std::log(0.7) + std::log(0.8);
  check("L1(singleton)",
        da_l1(std::vector<double>{0.9}, std::vector<double>{0.7}, std::vector<double>{0.3},
              std::vector<double>{0.2})
            .value,
        singleton);
  check("L1(0.5)", da_l1(half, half, half, half).value, 4 * std::log(0.5));
  o.detail << "(note: the listed -1.04982 for the singleton L1 case disagrees with its own closed form "
           << format_double(singleton) << "; the closed form is checked)";
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome cogan_tying() {
  Outcome o;
  TempDir dir("crossgan_accept");
  const auto corpus = synth_corpus(dir / "data", 3, 6, 16, 4);
  Trainer t(tiny_config(Regime::kCogan), &corpus);
  const auto before = trainable(t.params());
  for (int i = 0; i < kTyingSteps; ++i) t.step();

  const auto& p = t.params();
  const GeneratorSpec gspec{8, 16, 4};
  const DiscriminatorSpec dspec{16, 4};
  auto tied_prefix = [](const std::vector<std::string>& ties, const std::string& name) {
    return std::any_of(ties.begin(), ties.end(), [&](const std::string& t) { return name.starts_with(t); });
  };
  std::size_t tied = 0, untied_differ = 0;
  for (const auto& [domain_s, domain_l, ties] :
       {std::tuple{std::string("Gs/"), std::string("Gl/"), CoupledSpec::default_generator_ties(gspec)},
        std::tuple{std::string("Ds/"), std::string("Dl/"), CoupledSpec::default_discriminator_ties(dspec)}}) {
    for (const auto& name : p.names_with_prefix(domain_s)) {
      if (!p.at(name).trainable) continue;
      const std::string local = name.substr(3);
      const auto& vs = p.at(name).value;
      const auto& vl = p.at(domain_l + local).value;
      if (tied_prefix(ties, local)) {
        ++tied;
        o.require(vs == vl, "tied block " + local + " differs");
      } else if (!(vs == vl)) {
        ++untied_differ;
      }
    }
  }
  o.require(tied > 0, "no tied blocks");
  o.require(untied_differ > 0, "all untied blocks equal");
  o.require(!identical(before, trainable(p)), "parameters never changed");
  o.detail << tied << " tied blocks identical, " << untied_differ << " untied blocks differ after "
           << t.iteration() << " steps";
  return o;
}

// 5 -------------------------------------------------------------------------
Snapshot classifier_after(Variant variant, bool zero_fakes, int* calls) {
  auto c = tiny_config(Regime::kDann);
  c.variant = variant;
  Trainer t(c);
  t.hooks().on_classifier_fakes = [&](Tensor<float>& fake) {
    ++*calls;
    if (zero_fakes) fake.fill(0.0f);
  };
  dann_steps(t, 3, 7);
  return trainable(t.params(), kGroupClassifier);
}

Outcome variant_semantics() {
  Outcome o;
  {
    auto c = tiny_config(Regime::kDann);
    c.variant = Variant::kNoClassifierTraining;
    Trainer t(c);
    const auto c0 = trainable(t.params(), kGroupClassifier);
    const auto a0 = trainable(t.params(), kGroupTrunk);
    dann_steps(t, kVariantSteps, 100);
    o.require(identical(c0, trainable(t.params(), kGroupClassifier)), "theta_c changed under (false,false)");
    o.require(!identical(a0, trainable(t.params(), kGroupTrunk)), "theta_a never trained");
  }
  {
    int calls = 0;
    const auto normal = classifier_after(Variant::kNoFakeClassifierTraining, false, &calls);
    const auto zeroed = classifier_after(Variant::kNoFakeClassifierTraining, true, &calls);
    o.require(calls == 0 && identical(normal, zeroed), "fake batch reached theta_c under (true,false)");
    int control = 0;
    const auto full = classifier_after(Variant::kFullDomainAdaptation, false, &control);
    const auto full_zeroed = classifier_after(Variant::kFullDomainAdaptation, true, &control);
    o.require(control == 6 && !identical(full, full_zeroed), "counterfactual positive control");
  }
  {
    auto c = tiny_config(Regime::kDann);
    c.variant = Variant::kLazyFakeClassifierTraining;
    c.lazy_warmup = kLazyWarmup;
    Trainer t(c);
    std::set<std::int64_t> step6;
    t.hooks().on_write = [&](const std::string& phase, const std::vector<std::string>&) {
      if (phase == "step6") step6.insert(t.iteration());
    };
    dann_steps(t, kLazyWarmup + 4, 300);
    std::set<std::int64_t> expected;
    for (std::int64_t i = kLazyWarmup; i < kLazyWarmup + 4; ++i) expected.insert(i);
    o.require(step6 == expected, "lazy step 6 iterations");
    o.detail << "lazy w=" << kLazyWarmup << " first step6 at iteration "
             << (step6.empty() ? -1 : *step6.begin()) << "; ";
  }
  o.detail << "(false,false) froze theta_c over " << kVariantSteps << " steps; counterfactual fakes inert";
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome classifier_learns() {
  Outcome o;
  TempDir dir("crossgan_accept");
  const auto train_corpus = synth_corpus(dir / "train", 4, 16, 64, 1);
  const auto held = synth_corpus(dir / "held", 2, 16, 64, 99);
  const auto held_batch = load_batch(held, held.ids(), 64);
  int passed = 0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    TrainConfig c;
    c.regime = Regime::kDann;
    c.z_dim = 64;
    c.generator_channels = 8;
    c.discriminator_channels = 8;
    c.classifier_width = 32;
    c.batch_size = 8;
    c.seed = static_cast<std::uint64_t>(seed);
    c.iterations = kClassifierIterations;
    Trainer t(c, &train_corpus);
    int reached = -1;
    double accuracy = 0;
    for (int i = 1; i <= kClassifierIterations; ++i) {
      t.step();
      if (i % 50 == 0) {
        accuracy = classifier_accuracy(t.model(), held_batch);
        if (reached < 0 && accuracy >= kAccuracyTarget) reached = i;
      }
    }
    if (reached > 0) ++passed;
    o.detail << "seed " << seed << ": >=" << kAccuracyTarget << " at " << reached << ", final " << accuracy
             << "; ";
  }
  o.require(passed >= kSeedsRequired, std::to_string(passed) + "/" + std::to_string(kSeeds) + " seeds");
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome toy_dynamics() {
  Outcome o;
  int passed = 0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    ToyConfig c;
    c.seed = static_cast<std::uint64_t>(seed);
    const auto r = train_toy(c);
    if (r.coverage.covered >= kToyModesRequired) ++passed;
    o.detail << "seed " << seed << ": " << r.coverage.covered << "/8; ";
  }
  o.require(passed >= kSeedsRequired, std::to_string(passed) + "/" + std::to_string(kSeeds) + " seeds");
  return o;
}

// 8 -------------------------------------------------------------------------
std::vector<Neighbor> scan(const EmbeddingIndex& index, std::span<const float> q, std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < index.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double diff = static_cast<double>(index.vectors().row(i)[j]) - q[j];
      s += diff * diff;
    }
    all.push_back({index.frame_ids()[i], std::sqrt(s)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.frame_id < b.frame_id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

double greedy_oracle(const EpisodeBag& q, const EpisodeBag& c) {
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < q.rows.dim(0); ++i) {
    for (std::size_t j = 0; j < c.rows.dim(0); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < q.rows.row_size(); ++k) {
        const double diff = static_cast<double>(q.rows.row(i)[k]) - c.rows.row(j)[k];
        s += diff * diff;
      }
      pairs.push_back({std::sqrt(s), i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.d, a.i, a.j) < std::tie(b.d, b.i, b.j);
  });
  std::set<std::size_t> used_q, used_c;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    if (used_q.count(p.i) || used_c.count(p.j)) continue;
    used_q.insert(p.i);
    used_c.insert(p.j);
    best = std::min(best, p.d);
  }
  return best;
}

EpisodeBag random_bag(const std::string& id, std::size_t frames, std::size_t dim, std::uint64_t seed) {
  EpisodeBag b;
  b.episode_id = id;
  b.rows = uniform_tensor<float>({frames, dim}, seed);
  for (std::size_t i = 0; i < frames; ++i) b.frame_ids.push_back(static_cast<FrameId>(seed * 100 + i));
  return b;
}

Outcome retrieval_oracles() {
  Outcome o;
  const std::size_t n = 500, dim = 16;
  auto vectors = uniform_tensor<float>({n, dim}, 31);
  std::vector<FrameId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<FrameId>(i);
  const EmbeddingIndex index(std::move(vectors), ids, std::vector<Domain>(n, Domain::kS),
                             EmbeddingSource::kDiscriminator, "test");
  std::size_t knn_mismatch = 0;
  for (std::uint64_t q = 0; q < 200; ++q) {
    const auto query = uniform_tensor<float>({dim}, 1000 + q);
    if (knn(index, query.storage(), 10) != scan(index, query.storage(), 10)) ++knn_mismatch;
  }
  o.require(knn_mismatch == 0, std::to_string(knn_mismatch) + " knn queries differ from the scan");

  std::size_t distance_mismatch = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const auto a = random_bag("a", 4, 3, 2 * t + 5000);
    const auto b = random_bag("b", 4, 3, 2 * t + 5001);
    if (episode_distance(a, b) != greedy_oracle(a, b)) ++distance_mismatch;
  }
  o.require(distance_mismatch == 0, std::to_string(distance_mismatch) + " episode distances differ");

  std::vector<EpisodeBag> bags;
  for (std::uint64_t e = 0; e < 8; ++e) bags.push_back(random_bag("ep" + std::to_string(e), 5, 8, 7000 + e));
  bool self_first = true;
  for (const auto& q : bags) {
    const auto r = retrieve_episodes(q, bags, 3);
    self_first = self_first && r.ranking.front().episode_id == q.episode_id && r.ranking.front().distance == 0.0;
  }
  o.require(self_first, "self-retrieval");
  o.detail << "200 knn queries exact, 500 4x4 episode distances exact, self-retrieval rank 1 at 0";
  return o;
}

// 9 -------------------------------------------------------------------------
std::string file_bytes(const fs::path& p) { return read_text_file(p); }

Outcome reproducibility(const std::string& cli) {
  Outcome o;
  set_deterministic(true);
  TempDir dir("crossgan_accept");
  const auto corpus = synth_corpus(dir / "data", 2, 4, 16, 3);
  for (Regime regime : {Regime::kSingle, Regime::kCogan, Regime::kDann}) {
    auto c = tiny_config(regime);
    c.iterations = 3;
    c.checkpoint_every = 1;
    const fs::path fresh_dir = dir / ("fresh_" + to_string(regime));
    const fs::path split_dir = dir / ("split_" + to_string(regime));
    const auto fresh = train(c, corpus, fresh_dir);
    auto first = c;
    first.iterations = 1;
    train(first, corpus, split_dir);
    const auto resumed = train(c, corpus, split_dir, RunLayout{split_dir}.checkpoint(1));
    const auto a = load_checkpoint(fresh.final_checkpoint);
    const auto b = load_checkpoint(resumed.final_checkpoint);
    bool same = fingerprint(a.params) == fingerprint(b.params) && a.manifest == b.manifest &&
                a.extras == b.extras;
    for (const auto& [name, h] : a.params.entries()) same = same && h->value == b.params.at(name).value;
    o.require(same, to_string(regime) + " resume differs");
  }

  Trainer t(tiny_config(Regime::kCogan));
  t.cogan_step(images(4, 1), images(4, 2), noise(4, 3), noise(4, 4));
  save_checkpoint(dir / "ckpt", t.checkpoint());
  bool grids_equal = !cli.empty();
  for (const std::string domain : {"", " --domain L"}) {
    std::vector<std::string> pngs;
    for (int run = 0; run < 2 && !cli.empty(); ++run) {
      const fs::path out = dir / ("grid" + std::to_string(run) + ".png");
      const std::string cmd = "CROSSGAN_DETERMINISTIC=1 \"" + cli + "\" grid --checkpoint \"" +
                              (dir / "ckpt").string() + "\" --count 16 --seed 9" + domain + " --out \"" +
                              out.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) {
        grids_equal = false;
        break;
      }
      pngs.push_back(file_bytes(out));
    }
    grids_equal = grids_equal && pngs.size() == 2 && pngs[0] == pngs[1] && !pngs[0].empty();
  }
  o.require(grids_equal, "grid command output not byte-identical");
  o.detail << "resume bitwise equal for single/cogan/dann; grid PNGs byte-identical";
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome shape_contracts() {
  Outcome o;
  for (int res : {64, 128, 256}) {
    const int base = res == 64 ? GeneratorSpec{}.base_channels : 16;
    const GeneratorSpec gs{GeneratorSpec{}.z_dim, res, base};
    const DiscriminatorSpec ds{res, base};
    const std::size_t r = static_cast<std::size_t>(res);
    {
      auto gp = build_generator(gs, 1);
      Generator<float> g(gs, gp);
      const auto out = g.generate(uniform_tensor<float>({2, static_cast<std::size_t>(gs.z_dim)}, 2), Mode::kInference);
      o.require(out.shape() == Shape{2, 3, r, r}, "generator output at " + std::to_string(res));
    }
    auto dp = build_discriminator(ds, 3);
    Discriminator<float> d(ds, dp, dp);
    const auto pass = d.forward(uniform_tensor<float>({2, 3, r, r}, 4), Mode::kInference);
    o.require(pass.probs.size() == 2 && pass.logits.size() == 2, "realness at " + std::to_string(res));
    o.require(pass.features().shape() == Shape{2, static_cast<std::size_t>(ds.feature_width())},
              "features at " + std::to_string(res));
    bool rejected = false;
    try {
      d.forward(uniform_tensor<float>({1, 3, r / 2, r / 2}, 5), Mode::kInference);
    } catch (const std::exception&) {
      rejected = true;
    }
    o.require(rejected, "wrong image size accepted at " + std::to_string(res));
    o.detail << res << ": F=" << ds.feature_width() << " ";
  }
  const DannSpec spec{{32, 64, 8}, {64, 8}, 24, 2};
  auto params = build_dann(spec, 5);
  DannModel<float> m(spec, params);
  const auto out = m.forward(uniform_tensor<float>({3, 3, 64, 64}, 6), Mode::kInference);
  o.require(out.realness.size() == 3, "dann realness");
  o.require(out.domain_logits.shape() == Shape{3, 2}, "dann domain logits");
  o.require(out.trunk_features.shape() == Shape{3, static_cast<std::size_t>(spec.discriminator.feature_width())},
            "dann trunk features");
  o.require(out.classifier_features.shape() == Shape{3, 24}, "dann classifier features");
  o.detail << "dann outputs realness/domain_logits/trunk_features/classifier_features";
  return o;
}

// 11 ------------------------------------------------------------------------
Outcome diversity() {
  Outcome o;
  const Tensor<float> same({4, 3, 8, 8}, 0.3f);
  o.require(diversity_score(same) == 0.0, "identical batch");
  Tensor<float> extremes({2, 3, 8, 8});
  for (std::size_t i = 0; i < extremes.size(); ++i) extremes[i] = i < extremes.size() / 2 ? -1.0f : 1.0f;
  const double two = diversity_score(extremes);
  o.require(two == 2.0, "two-image batch");
  const Tensor<float> three({3, 1, 1, 4}, std::vector<float>{0, 0, 0, 0, 1, 0, 0, 0, 0.5f, 0.5f, -0.5f, 1});
  double pair_sum = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 4; ++k) s += std::pow(three.row(i)[k] - three.row(j)[k], 2);
      pair_sum += std::sqrt(s);
    }
  }
  const double oracle = pair_sum / 3.0 / std::sqrt(4.0);
  const double got = diversity_score(three);
  o.require(std::abs(got - oracle) <= kDiversityTolerance, "three-image case");
  o.detail << "identical 0, extremes " << two << ", three-image " << got << " vs " << oracle;
  return o;
}

}  // namespace
}  // namespace crossgan

int main(int argc, char** argv) {
  using namespace crossgan;
  std::string cli;
#ifdef CROSSGAN_CLI_PATH
  cli = CROSSGAN_CLI_PATH;
#endif
  if (const char* env = std::getenv("CROSSGAN_CLI")) cli = env;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"gradient reversal", gradient_reversal_check},
      {"loss values", loss_values},
      {"cogan tying", cogan_tying},
      {"variant semantics", variant_semantics},
      {"domain classifier learns", classifier_learns},
      {"toy gan dynamics", toy_dynamics},
      {"retrieval oracles", retrieval_oracles},
      {"reproducibility", [&] { return reproducibility(cli); }},
      {"shape contracts", shape_contracts},
      {"diversity diagnostic", diversity},
  };

  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
      const Outcome o = criteria[i].second();
      pass = o.pass;
      detail = o.detail.str();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!pass) ++failures;
    std::printf("criterion %zu (%s): %s [%.1fs] %s\n", i + 1, criteria[i].first.c_str(), pass ? "PASS" : "FAIL",
                secs, detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
