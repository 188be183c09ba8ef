#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "proseg/config.hpp"
#include "proseg/datagen.hpp"
#include "proseg/io.hpp"

using namespace proseg;
using namespace proseg::testing;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("feature files round-trip bit for bit") {
  RandomSource rng(501);
  ObservationSequence seq = random_sequence(37, 5, 2, rng);
  // float32 storage: write once, read, write again, compare bytes
  std::string p1 = temp_path("proseg_feat_a.feat");
  std::string p2 = temp_path("proseg_feat_b.feat");
  write_feature_file(p1, seq, 0.01);
  FeatureData loaded = read_feature_file(p1);
  CHECK(loaded.frame_shift_s == 0.01);
  CHECK(loaded.sequence.frames() == 37);
  write_feature_file(p2, loaded.sequence, loaded.frame_shift_s);
  CHECK(file_bytes(p1) == file_bytes(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("label files round-trip exactly") {
  std::vector<int> letters = {0, 0, 1, 2, 2};
  std::vector<int> words = {3, 3, 3, 1, 1};
  std::string path = temp_path("proseg_labels.labels");
  write_label_file(path, letters, words);
  auto [l2, w2] = read_label_file(path);
  CHECK(l2 == letters);
  CHECK(w2 == words);
  std::remove(path.c_str());
}

TEST_CASE("model checkpoints restore every parameter exactly") {
  Hyperparameters hp = toy_hp(3, 2, 4, 3, 20, 3);
  RandomSource rng(503);
  ModelState state = sample_prior_state(hp, 3, 2, rng);
  std::string path = temp_path("proseg_model.bin");
  save_model(path, state);
  ModelState loaded = load_model(path);
  CHECK(loaded.beta_lm == state.beta_lm);
  CHECK(loaded.pi_lm == state.pi_lm);
  CHECK(loaded.beta_wm == state.beta_wm);
  CHECK(loaded.pi_wm == state.pi_wm);
  CHECK(loaded.words == state.words);
  CHECK(loaded.duration_rates == state.duration_rates);
  for (int j = 0; j < 3; ++j) {
    CHECK(loaded.emission_params[j].mean == state.emission_params[j].mean);
    CHECK(loaded.emission_params[j].cov == state.emission_params[j].cov);
  }
  CHECK(loaded.prosody_interior.mean == state.prosody_interior.mean);
  CHECK(loaded.prosody_boundary.cov == state.prosody_boundary.cov);
  std::remove(path.c_str());
}

TEST_CASE("train states survive a save/load cycle") {
  CorpusSpec spec;
  spec.n_sequences = 2;
  spec.seed = 505;
  spec.prosody_boundary_mean = VectorXd::Ones(1);
  spec.prosody_interior_mean = VectorXd::Zero(1);
  GeneratedCorpus corpus = generate(spec);
  Hyperparameters hp = toy_hp(3, 1, 5, 5, 90, 4);
  TrainState ts = run(corpus.sequences, hp, 99, 2);

  std::string path = temp_path("proseg_train.bin");
  save_train_state(path, ts);
  TrainState loaded = load_train_state(path);
  CHECK(loaded.rng_seed == ts.rng_seed);
  CHECK(loaded.sweep_index == ts.sweep_index);
  REQUIRE(loaded.segmentations.size() == ts.segmentations.size());
  for (size_t i = 0; i < ts.segmentations.size(); ++i) {
    CHECK(loaded.segmentations[i].word_labels == ts.segmentations[i].word_labels);
    CHECK(loaded.segmentations[i].letter_durations == ts.segmentations[i].letter_durations);
    CHECK(loaded.segmentations[i].boundary_flags == ts.segmentations[i].boundary_flags);
  }
  CHECK(loaded.model.pi_lm == ts.model.pi_lm);
  REQUIRE(loaded.trace.size() == ts.trace.size());
  CHECK(loaded.trace.back().log_joint == ts.trace.back().log_joint);
  std::remove(path.c_str());
}

TEST_CASE("wav files round-trip within quantization error") {
  AudioBuffer audio;
  audio.sample_rate = 8000.0;
  audio.samples.resize(800);
  for (size_t i = 0; i < audio.samples.size(); ++i)
    audio.samples[i] = 0.5 * std::sin(2.0 * M_PI * 220.0 * i / 8000.0);
  std::string path = temp_path("proseg_tone.wav");
  write_wav(path, audio);
  AudioBuffer loaded = load_wav(path);
  CHECK(loaded.sample_rate == 8000.0);
  REQUIRE(loaded.samples.size() == audio.samples.size());
  for (size_t i = 0; i < audio.samples.size(); ++i)
    CHECK(std::abs(loaded.samples[i] - audio.samples[i]) < 1e-4);
  std::remove(path.c_str());
}

TEST_CASE("corrupt files are reported as usage errors") {
  std::string path = temp_path("proseg_bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a real file";
  }
  CHECK_THROWS_AS(read_feature_file(path), UsageError);
  CHECK_THROWS_AS(load_model(path), UsageError);
  CHECK_THROWS_AS(load_wav(path), UsageError);
  CHECK_THROWS_AS(read_feature_file(temp_path("proseg_missing.feat")), UsageError);
  std::remove(path.c_str());
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  std::string path = temp_path("proseg_cfg.txt");
  {
    std::ofstream out(path);
    out << "# comment\nseed = 7\nn_sweeps = 12\n";
  }
  RunConfig cfg = parse_run_config(path);
  CHECK(cfg.seed == 7);
  CHECK(cfg.n_sweeps == 12);
  CHECK(cfg.gamma_lm == 10.0);

  {
    std::ofstream out(path);
    out << "seed = 7\nmystery_knob = 3\n";
  }
  CHECK_THROWS_AS(parse_run_config(path), UsageError);

  {
    std::ofstream out(path);
    out << "n_sweeps = banana\n";
  }
  CHECK_THROWS_AS(parse_run_config(path), UsageError);

  {
    std::ofstream out(path);
    out << "n_sweeps = 5\nn_sweeps = 6\n";
  }
  CHECK_THROWS_AS(parse_run_config(path), UsageError);
  std::remove(path.c_str());
}

TEST_CASE("prosody mode channel selection") {
  CHECK(prosody_mode_channels("none", 0).empty());
  CHECK(prosody_mode_channels("f0", 2) == std::vector<int>{0});
  CHECK(prosody_mode_channels("pause", 2) == std::vector<int>{1});
  CHECK(prosody_mode_channels("both", 2) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(prosody_mode_channels("both", 1), UsageError);
  CHECK_THROWS_AS(prosody_mode_channels("sparkle", 2), UsageError);
}

TEST_CASE("hyperparameter materialization fills dimension-derived defaults") {
  RunConfig cfg;
  Hyperparameters hp = materialize_hyperparameters(cfg, 12, 2);
  CHECK(hp.emission_niw.dim() == 12);
  CHECK(hp.emission_niw.nu0 == 14.0);
  CHECK(hp.prosody_niw_boundary.mu0[0] == 1.0);
  CHECK(hp.prosody_niw_boundary.kappa0 == 2.0);
  CHECK(hp.prosody_niw_interior.kappa0 == 100.0);
  CHECK(hp.prosody_niw_interior.nu0 == 4.0);
}

}  // TEST_SUITE
