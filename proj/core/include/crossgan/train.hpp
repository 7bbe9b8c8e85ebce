#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crossgan/checkpoint.hpp"
#include "crossgan/config.hpp"
#include "crossgan/corpus.hpp"
#include "crossgan/losses.hpp"
#include "crossgan/model.hpp"
#include "crossgan/optim.hpp"
#include "crossgan/rng.hpp"

namespace crossgan {

/// Controls for the classifier steps of the domain-adaptation update.
struct VariantFlags {
  bool train_classifier_real = true;
  bool train_classifier_fake = true;
  std::int64_t lazy_fake_start_iteration = 0;

  friend bool operator==(const VariantFlags&, const VariantFlags&) = default;
};

enum class Variant {
  kFullDomainAdaptation,
  kNoClassifierTraining,
  kNoFakeClassifierTraining,
  kNoRealClassifierTraining,
  kLazyFakeClassifierTraining,
};

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
/// The flag triple of a variant; `warmup` is used by the lazy variant only.
VariantFlags variant_of(Variant v, std::int64_t warmup);
VariantFlags variant_of(const std::string& name, std::int64_t warmup);

struct TrainConfig {
  Regime regime = Regime::kDann;
  Domain domain = Domain::kS;  ///< single regime only
  int resolution = 64;
  int z_dim = 1024;
  int generator_channels = 128;
  int discriminator_channels = 128;
  int classifier_width = 128;
  /// Batch size per domain for cogan/dann, total otherwise.
  int batch_size = 64;
  double learning_rate = 2e-4;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::int64_t iterations = 1000;
  bool non_saturating = true;
  Variant variant = Variant::kFullDomainAdaptation;
  /// Iterations before step 6 starts in the lazy variant; -1 means one epoch.
  std::int64_t lazy_warmup = -1;
  /// Master seed; init, data, z and dump streams are derived from it.
  std::uint64_t seed = 1;
  /// Checkpoint / sample cadence in iterations; 0 means once per epoch.
  std::int64_t checkpoint_every = 0;
  std::int64_t sample_every = 0;
  /// Most recent checkpoints kept besides the per-epoch ones.
  int keep_last = 3;
  int sample_count = 64;
  /// Admit resolutions other than 64/128/256 (small test networks).
  bool allow_any_resolution = false;

  KeyValues to_key_values() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_key_values(const KeyValues& kv);
  void validate() const;
  ModelSpec model_spec() const;
  OptimizerConfig optimizer_config() const;
};

/// Independent seeded streams of a run.
enum class Stream : std::uint64_t { kInit = 1, kData = 2, kZ = 3, kDump = 4 };
std::uint64_t stream_seed(const TrainConfig& c, Stream s);

/// Instrumentation points of a training step.
struct StepHooks {
  /// After every parameter write: phase name and the updated group prefixes.
  std::function<void(const std::string& phase, const std::vector<std::string>& groups)> on_write;
  /// Generated images about to be fed to the classifier in step 6.
  std::function<void(Tensor<float>& images)> on_classifier_fakes;
};

/// Training state plus the regime's step functions.
///
/// Step functions update parameters, increment the iteration once and return
/// the loss reports of the step in the order they were computed. A
/// non-finite loss throws NumericalError before the offending update.
class Trainer {
 public:
  /// Fresh state. `corpus` is needed by step() and for epoch lengths; it
  /// must outlive the trainer.
  explicit Trainer(TrainConfig config, const Corpus* corpus = nullptr);
  /// Restores parameters, optimizer moments, iteration and z stream.
  static Trainer resume(const Checkpoint& ckpt, const Corpus* corpus = nullptr);

  const TrainConfig& config() const noexcept { return config_; }
  Model& model() noexcept { return *model_; }
  NetworkParams<float>& params() noexcept { return model_->params(); }
  std::int64_t iteration() const noexcept { return iteration_; }
  const VariantFlags& flags() const noexcept { return flags_; }
  StepHooks& hooks() noexcept { return hooks_; }
  /// Iterations per pass over the (smallest) domain pool; 1 without corpus.
  std::int64_t iterations_per_epoch() const noexcept { return epoch_length_; }

  std::vector<LossReport> gan_step(const Tensor<float>& real, const Tensor<float>& z);
  std::vector<LossReport> cogan_step(const Tensor<float>& real_s, const Tensor<float>& real_l,
                                     const Tensor<float>& z_s, const Tensor<float>& z_l);
  std::vector<LossReport> dann_step(const Tensor<float>& real_s, const Tensor<float>& real_l,
                                    const Tensor<float>& z_s, const Tensor<float>& z_l);
  /// Draws the next data and z batches and runs the regime's step.
  std::vector<LossReport> step();

  /// Prior draws Uniform(-1, 1) from the run's z stream.
  Tensor<float> draw_z(std::size_t m);
  /// Real batch of the current iteration for one domain (or all frames).
  ImageBatch real_batch(std::optional<Domain> domain) const;

  /// Gradient of domain d's generator objective for the current parameters
  /// (no update, no state change), keyed by parameter name.
  std::map<std::string, Tensor<float>> cogan_generator_gradient(Domain d, const Tensor<float>& z);

  Checkpoint checkpoint() const;

 private:
  Trainer(TrainConfig config, const Corpus* corpus, Model model);
  void setup();
  void apply(const std::string& optimizer, const std::string& phase);
  void guard(const LossReport& r) const;

  TrainConfig config_;
  const Corpus* corpus_;
  std::unique_ptr<Model> model_;
  std::map<std::string, Optimizer> optimizers_;
  std::vector<std::unique_ptr<MinibatchStream>> streams_;
  VariantFlags flags_;
  std::int64_t epoch_length_ = 1;
  std::int64_t iteration_ = 0;
  Rng z_rng_;
  StepHooks hooks_;
};

/// Files of a run directory.
struct RunLayout {
  std::filesystem::path root;
  std::filesystem::path config() const { return root / "config.txt"; }
  std::filesystem::path loss_log() const { return root / "loss.tsv"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path checkpoint(std::int64_t iteration) const;
  std::filesystem::path samples() const { return root / "samples"; }
};

struct TrainResult {
  std::filesystem::path final_checkpoint;
  std::int64_t iterations = 0;
  std::vector<std::filesystem::path> sample_grids;
  /// Hash of the fixed z batch used for every sample dump.
  std::string dump_z_hash;
};

/// Runs config.iterations steps in `run_dir`: writes config.txt first, then
/// appends every loss report to loss.tsv, and at each cadence writes a
/// checkpoint and a samples/epoch_<n>.png grid from a fixed z batch.
/// When `resume_from` is given the run continues from that checkpoint.
/// On a non-finite loss a diagnostic checkpoint "abort_<iteration>" is
/// written and NumericalError is rethrown.
TrainResult train(const TrainConfig& config, const Corpus& corpus,
                  const std::filesystem::path& run_dir,
                  const std::optional<std::filesystem::path>& resume_from = std::nullopt,
                  const std::function<void(const std::string&)>& log = {});

/// Model of a checkpoint written by a Trainer.
Model load_model(const Checkpoint& ckpt);

/// Generator output in inference mode. `domain` is required for cogan and
/// dann checkpoints.
ImageBatch sample(Model& model, const Tensor<float>& z, std::optional<Domain> domain);
ImageBatch sample(const Checkpoint& ckpt, const Tensor<float>& z, std::optional<Domain> domain);
/// Both cogan generators on the same z, index-aligned.
std::pair<ImageBatch, ImageBatch> sample_paired(const Checkpoint& ckpt, const Tensor<float>& z);

/// Seeded Uniform(-1, 1) prior batch.
Tensor<float> seeded_z(std::size_t m, int z_dim, std::uint64_t seed);

/// Mean pairwise Euclidean distance of the flattened images divided by
/// sqrt(values per image).
double diversity_score(const Tensor<float>& images);
inline double diversity_score(const ImageBatch& batch) { return diversity_score(batch.data); }

/// Domain-classification accuracy of a dann model in inference mode.
double classifier_accuracy(Model& model, const ImageBatch& batch);

}  // namespace crossgan
