#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sstream>
#include <sys/wait.h>

#include "crossgan/checkpoint.hpp"
#include "crossgan/config.hpp"
#include "crossgan/embed.hpp"
#include "crossgan/image.hpp"
#include "crossgan/train.hpp"
#include "support.hpp"

namespace crossgan {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct Run {
  int exit_code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string("CROSSGAN_DETERMINISTIC=1 \"") + CROSSGAN_CLI_PATH + "\" " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    out.push_back(fields);
  }
  return out;
}

std::string tiny_flags(const std::string& regime) {
  return "--regime " + regime +
         " --resolution 16 --allow_any_resolution true --z_dim 8 --generator_channels 4"
         " --discriminator_channels 4 --classifier_width 6 --batch_size 4 --sample_count 4";
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("crossgan_cli");
    corpus_ = path("corpus");
    ASSERT_EQ(cli("synth --out " + corpus_.string() + " --episodes 3 --frames 4 --resolution 16").exit_code, 0);
    ASSERT_EQ(cli("train --corpus " + manifest().string() + " --run " + path("dann").string() + " " +
                  tiny_flags("dann") + " --iterations 4 --checkpoint_every 1")
                  .exit_code,
              0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path path(const std::string& name) { return dir_->path() / name; }
  static fs::path manifest() { return corpus_ / "manifest.tsv"; }
  static fs::path dann_checkpoint() { return RunLayout{path("dann")}.checkpoint(4); }

  static TempDir* dir_;
  static fs::path corpus_;
};

TempDir* CliTest::dir_ = nullptr;
fs::path CliTest::corpus_;

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(cli("").exit_code, 1);
  EXPECT_EQ(cli("--help").exit_code, 0);
  EXPECT_EQ(cli("grid --checkpoint " + dann_checkpoint().string() + " --count 5 --out x.png").exit_code, 1);
  EXPECT_EQ(cli("grid --checkpoint " + path("missing").string() + " --out x.png").exit_code, 1);
  EXPECT_EQ(cli("train --corpus " + manifest().string() + " --run " + path("nan").string() + " " +
                tiny_flags("single") + " --iterations 3 --optimizer sgd --learning_rate 1e30")
                .exit_code,
            2);
  EXPECT_TRUE(fs::exists(path("nan/checkpoints/abort_0")));
}

TEST_F(CliTest, IngestCountsMatchManifest) {
  const auto r = cli("ingest --root " + corpus_.string() + " --out " + path("m.tsv").string());
  ASSERT_EQ(r.exit_code, 0);
  std::size_t frames = 0, per_domain = 0, per_episode = 0;
  for (const auto& row : rows(r.out)) {
    if (row[0] == "frames") frames = std::stoul(row[1]);
    if (row[0] == "domain") per_domain += std::stoul(row[2]);
    if (row[0] == "episode") per_episode += std::stoul(row[2]);
  }
  EXPECT_EQ(frames, 24u);
  EXPECT_EQ(per_domain, frames);
  EXPECT_EQ(per_episode, frames);
  EXPECT_EQ(rows(read_text_file(path("m.tsv"))).size(), frames);
}

TEST_F(CliTest, GridDimensionsAndSingleItemEqualsSample) {
  ASSERT_EQ(cli("grid --checkpoint " + dann_checkpoint().string() + " --count 9 --out " + path("g.png").string())
                .exit_code,
            0);
  const auto both = read_image(path("g.png"));
  EXPECT_EQ(both.width, 48 + 8 + 48);
  EXPECT_EQ(both.height, 48);

  ASSERT_EQ(cli("grid --checkpoint " + dann_checkpoint().string() + " --count 1 --seed 3 --domain L --out " +
                path("one.png").string())
                .exit_code,
            0);
  const auto ckpt = load_checkpoint(dann_checkpoint());
  const auto expected = batch_item(sample(ckpt, seeded_z(1, 8, 3), Domain::kL).data, 0);
  const auto got = read_image(path("one.png"));
  EXPECT_EQ(got.width, 16);
  EXPECT_EQ(got.pixels, expected.pixels);
}

TEST_F(CliTest, KnnPanelOfDannModelHasFortyOneTiles) {
  const auto r = cli("knn-panel --checkpoint " + dann_checkpoint().string() + " --corpus " + manifest().string() +
                     " --index " + path("index").string() + " --z-seed 2 --k 10 --out " + path("k.png").string());
  ASSERT_EQ(r.exit_code, 0);
  const auto lines = rows(r.out);
  EXPECT_EQ(lines.back(), (std::vector<std::string>{"tiles", "41"}));
  EXPECT_TRUE(fs::exists(path("index/discriminator/manifest.txt")));
  EXPECT_TRUE(fs::exists(path("index/classifier/manifest.txt")));
  const auto panel = read_image(path("k.png"));
  EXPECT_EQ(panel.width, 11 * 16 + 10 * 2);
  EXPECT_EQ(panel.height, 4 * 16 + 3 * 2);

  // A cached index from another checkpoint is rejected.
  const auto other = RunLayout{path("dann")}.checkpoint(2);
  EXPECT_EQ(cli("knn-panel --checkpoint " + other.string() + " --corpus " + manifest().string() + " --index " +
                path("index").string() + " --out " + path("k2.png").string())
                .exit_code,
            1);
}

TEST_F(CliTest, RetrieveMatchesModule) {
  const auto r = cli("retrieve --checkpoint " + dann_checkpoint().string() + " --corpus " + manifest().string() +
                     " --index " + path("rindex").string() + " --episode S/ep001 --top 4");
  ASSERT_EQ(r.exit_code, 0);

  const auto ckpt = load_checkpoint(dann_checkpoint());
  const auto corpus = read_manifest(manifest());
  const auto index = build_index(ckpt, corpus, EmbeddingSource::kDiscriminator, 32);
  const auto bags = episode_bags(index, corpus);
  const auto query = *std::find_if(bags.begin(), bags.end(), [](const EpisodeBag& b) {
    return b.episode_id == "S/ep001";
  });
  const auto expected = retrieve_episodes(query, bags, 4);
  const auto lines = rows(r.out);
  ASSERT_EQ(lines.size(), expected.ranking.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i][1], expected.ranking[i].episode_id);
    EXPECT_EQ(lines[i][2], format_double(expected.ranking[i].distance));
  }
  EXPECT_EQ(lines[0][1], "S/ep001");

  EXPECT_EQ(cli("retrieve --checkpoint " + dann_checkpoint().string() + " --corpus " + manifest().string() +
                " --index " + path("rindex").string() + " --episode nope")
                .exit_code,
            1);
}

TEST_F(CliTest, LossesSummarizesEverySeries) {
  const auto r = cli("losses --run " + path("dann").string() + " --samples 4");
  ASSERT_EQ(r.exit_code, 0);
  const auto lines = rows(r.out);
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines[0][0], "series");
  std::size_t counted = 0;
  for (const auto& row : lines) {
    if (row.size() == 7 && row[0] != "series") counted += std::stoul(row[1]);
  }
  EXPECT_EQ(counted, rows(read_text_file(path("dann/loss.tsv"))).size());
}

TEST_F(CliTest, TrainFlagsOverrideConfigFile) {
  write_text_file(path("cfg.txt"), "iterations=7\nlearning_rate=0.001\n");
  ASSERT_EQ(cli("train --config " + path("cfg.txt").string() + " --corpus " + manifest().string() + " --run " +
                path("single").string() + " " + tiny_flags("single") + " --iterations 2")
                .exit_code,
            0);
  const auto kv = read_key_values(path("single/config.txt"));
  EXPECT_EQ(kv.at("iterations"), "2");
  EXPECT_EQ(kv.at("learning_rate"), format_double(0.001));
}

TEST_F(CliTest, ToyRegimeReportsCoverage) {
  const auto r = cli("train --regime toy --iterations 20 --batch_size 32 --z_dim 4 --run " + path("toy").string());
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(rows(r.out).back()[0], "covered");
  EXPECT_TRUE(fs::exists(path("toy/samples.tsv")));
}

}  // namespace
}  // namespace crossgan
