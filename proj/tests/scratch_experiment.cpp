// throwaway driver for tuning acceptance-test corpora; not part of the build
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "helpers.hpp"
#include "proseg/datagen.hpp"
#include "proseg/eval.hpp"
#include "proseg/gibbs.hpp"

using namespace proseg;

int main(int argc, char** argv) {
  int mode = argc > 1 ? std::atoi(argv[1]) : 0;
  int n_sweeps = argc > 2 ? std::atoi(argv[2]) : 30;
  uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
  double separation = argc > 4 ? std::atof(argv[4]) : 5.0;
  int prosody = argc > 5 ? std::atoi(argv[5]) : 0;  // 0 none, 2 both

  CorpusSpec spec;
  spec.n_words = 5;
  spec.n_letters = 5;
  spec.letters_per_word_min = 2;
  spec.letters_per_word_max = 4;
  spec.n_sequences = mode == 8 ? 60 : 10;
  spec.words_per_sequence_min = mode == 8 ? 4 : 3;
  spec.words_per_sequence_max = mode == 8 ? 5 : 4;
  spec.emission_separation = separation;
  spec.mean_letter_duration = 15.0;
  spec.spectral_dim = 3;
  spec.prosody_boundary_mean = VectorXd::Ones(2);
  spec.prosody_interior_mean = VectorXd::Zero(2);
  spec.seed = 1000 + seed;
  GeneratedCorpus corpus = generate(spec);

  long frames = 0;
  for (auto& s : corpus.sequences) frames += s.frames();
  std::printf("corpus: %zu seqs, %ld frames total (%.0f avg)\n", corpus.sequences.size(),
              frames, frames / double(corpus.sequences.size()));

  std::vector<ObservationSequence> data = corpus.sequences;
  if (prosody == 0)
    for (auto& s : data) s.prosody.resize(s.frames(), 0);
  std::vector<FrameLabels> truth;
  for (const auto& t : corpus.truths) truth.push_back({t.letter_labels, t.word_labels});

  Hyperparameters hp;
  hp.max_words = 10;
  hp.max_letters = 10;
  hp.max_word_duration = 90;
  hp.max_word_length = 10;
  hp.emission_niw = NIWParams::isotropic(3, 0.0, 0.01, 1.0, 5);
  if (prosody > 0) {
    hp.prosody_niw_boundary = NIWParams::isotropic(prosody, 1.0, 2.0, 1.0, prosody + 2);
    hp.prosody_niw_interior = NIWParams::isotropic(prosody, 0.0, 100.0, 1.0, prosody + 2);
  }

  GibbsOptions opts;
  opts.workers = 2;
  opts.fresh_words = argc > 6 ? std::atoi(argv[6]) : 1;

  auto t0 = std::chrono::steady_clock::now();
  TrainState ts = init(data, hp, seed, opts);
  auto t1 = std::chrono::steady_clock::now();
  std::printf("init: %.2f s\n", std::chrono::duration<double>(t1 - t0).count());

  for (int s = 0; s < n_sweeps; ++s) {
    sweep(ts, data, hp, opts, &truth);
    const auto& e = ts.trace.back();
    if ((s + 1) % 5 == 0 || s < 3 || s + 1 == n_sweeps)
      std::printf("sweep %3d: logj %.1f letterARI %.3f wordARI %.3f (%.0f ms)\n", s + 1,
                  e.log_joint, e.letter_ari, e.word_ari, e.wall_ms);
  }

  std::printf("true dictionary:\n");
  for (int i = 0; i < spec.n_words; ++i) {
    std::printf("  true %d:", i);
    for (int l : corpus.model.words[i]) std::printf(" %d", l);
    std::printf("\n");
  }
  TransitionCounts counts = count_transitions(ts, hp);
  std::printf("learned dictionary (occurrences):\n");
  for (int i = 0; i < hp.max_words; ++i) {
    if (counts.word_occurrences[i] == 0) continue;
    std::printf("  word %d (%ldx):", i, counts.word_occurrences[i]);
    for (int l : ts.model.words[i]) std::printf(" %d", l);
    std::printf("\n");
  }
  double true_tokens = 0, got_tokens = 0;
  for (const auto& t : corpus.truths) true_tokens += t.word_ids.size();
  for (const auto& s : ts.segmentations) got_tokens += s.word_labels.size();
  std::printf("tokens: true %.0f vs learned %.0f\n", true_tokens, got_tokens);

  // score the truth segmentation under the generating parameters
  TrainState truth_ts;
  truth_ts.model = corpus.model;
  if (prosody == 0) {
    truth_ts.model.prosody_interior = Gaussian{};
    truth_ts.model.prosody_boundary = Gaussian{};
  }
  for (const auto& t : corpus.truths) {
    Segmentation seg;
    seg.word_labels = t.word_ids;
    seg.word_durations = t.word_durations;
    seg.letter_labels = t.letter_labels;
    seg.boundary_flags = t.boundary_flags;
    truth_ts.segmentations.push_back(seg);
  }
  Hyperparameters truth_hp = hp;
  truth_hp.max_words = spec.n_words;
  truth_hp.max_letters = spec.n_letters;
  truth_hp.emission_niw = NIWParams::isotropic(3, 0.0, 0.01, 1.0, 5);
  std::printf("log joint: learned %.1f vs truth-under-generating-model %.1f\n",
              ts.trace.back().log_joint,
              log_joint_score(truth_ts, data, truth_hp));
  return 0;
}
