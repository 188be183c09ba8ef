#pragma once

#include "proseg/model_core.hpp"
#include "proseg/rng.hpp"

namespace proseg {

struct CorpusSpec {
  int n_words = 5;
  int n_letters = 5;
  int letters_per_word_min = 2;
  int letters_per_word_max = 4;
  int n_sequences = 10;
  int words_per_sequence_min = 2;
  int words_per_sequence_max = 3;
  double zipf_alpha = 0.0;  // 0 = uniform word frequencies
  double emission_separation = 5.0;  // min distance between letter means, in st.dev. units
  double mean_letter_duration = 15.0;
  int spectral_dim = 3;
  VectorXd prosody_boundary_mean;  // empty = no prosody channels
  VectorXd prosody_interior_mean;
  uint64_t seed = 0;

  void check() const;
};

struct GroundTruth {
  std::vector<int> letter_labels;  // per frame
  std::vector<int> word_labels;    // per frame, word identity of the covering segment
  std::vector<int> word_ids;       // per token
  std::vector<int> word_durations;
  std::vector<uint8_t> boundary_flags;
};

struct GeneratedCorpus {
  std::vector<ObservationSequence> sequences;
  std::vector<GroundTruth> truths;
  ModelState model;
};

// rank-weighted probabilities, weight_k proportional to k^-alpha
VectorXd zipf_weights(int n, double alpha);

// Generating model: well-separated unit-covariance letter emissions, shared
// duration rate, distinct dictionary entries, prosody Gaussians at the
// requested means. Word transition rows all equal the rank weights, so
// per-position i.i.d. draws and the bigram view coincide.
ModelState sample_model(const CorpusSpec& spec, RandomSource& rng);

GeneratedCorpus generate(const CorpusSpec& spec);

}  // namespace proseg
