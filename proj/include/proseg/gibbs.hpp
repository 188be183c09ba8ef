#pragma once

#include <functional>
#include <optional>

#include "proseg/segmentation.hpp"

namespace proseg {

struct GibbsOptions {
  int fresh_words = 1;  // prior-fresh candidate words offered to the sampler per sweep
  int workers = 0;      // threads for the per-sequence phases; 0 = all cores
};

// Ground-truth frame labels for trace metrics (optional).
struct FrameLabels {
  std::vector<int> letters;
  std::vector<int> words;
};

struct TraceEntry {
  double log_joint = 0.0;
  double letter_ari = std::numeric_limits<double>::quiet_NaN();
  double word_ari = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

struct TrainState {
  ModelState model;
  std::vector<Segmentation> segmentations;
  int sweep_index = 0;
  uint64_t rng_seed = 0;
  std::vector<TraceEntry> trace;
};

ModelState sample_prior_state(const Hyperparameters& hp, int spectral_dim,
                              int prosody_dim, RandomSource& rng);

// Fresh dictionary entry from the current letter model: length uniform on
// 1..max_word_length, first letter from the base distribution, then the
// letter bigram chain.
std::vector<int> sample_prior_word(const ModelState& state, const Hyperparameters& hp,
                                   RandomSource& rng);

// Prior model plus segmentations forward-sampled against it. Deterministic
// given the seed.
TrainState init(const std::vector<ObservationSequence>& data, const Hyperparameters& hp,
                uint64_t seed, const GibbsOptions& opts = {});

// One full blocked sweep: segmentations, word letter sequences, letter
// alignments, transition matrices, emission/duration parameters, prosody
// parameters; appends a trace entry.
void sweep(TrainState& ts, const std::vector<ObservationSequence>& data,
           const Hyperparameters& hp, const GibbsOptions& opts = {},
           const std::vector<FrameLabels>* truth = nullptr);

struct SegmentRef {
  int sequence = 0;
  int start = 0;
  int duration = 0;
};

// Letter-level decode of every assigned segment, then a uniform pick among
// the decodes that fit all assigned segment durations.
std::vector<int> resample_word_letters(int word_index,
                                       const std::vector<SegmentRef>& segments,
                                       const std::vector<ObservationSequence>& data,
                                       const std::vector<FrameLogLik>& frame_tables,
                                       const ModelState& state, const Hyperparameters& hp,
                                       RandomSource& rng);

using SweepCallback = std::function<void(const TrainState&)>;

TrainState run(const std::vector<ObservationSequence>& data, const Hyperparameters& hp,
               uint64_t seed, int n_sweeps, const GibbsOptions& opts = {},
               const std::vector<FrameLabels>* truth = nullptr,
               const SweepCallback& after_sweep = nullptr);

// Continues a loaded state up to n_sweeps total; identical to an
// uninterrupted run with the same seed.
void resume(TrainState& ts, const std::vector<ObservationSequence>& data,
            const Hyperparameters& hp, int n_sweeps, const GibbsOptions& opts = {},
            const std::vector<FrameLabels>* truth = nullptr,
            const SweepCallback& after_sweep = nullptr);

// log p(segmentations, observations | model): transition, duration and
// segment-likelihood terms with letter compositions marginalized.
double log_joint_score(const TrainState& ts, const std::vector<ObservationSequence>& data,
                       const Hyperparameters& hp, int workers = 0);

struct TransitionCounts {
  MatrixXd word_bigrams;    // max_words x max_words
  MatrixXd letter_bigrams;  // max_letters x max_letters
  std::vector<long> word_occurrences;
};

TransitionCounts count_transitions(const TrainState& ts, const Hyperparameters& hp);

struct LetterStats {
  std::vector<SufficientStatsGaussian> gaussian;
  std::vector<SufficientStatsPoisson> poisson;
};

LetterStats collect_letter_stats(const TrainState& ts,
                                 const std::vector<ObservationSequence>& data);

struct ProsodyStats {
  SufficientStatsGaussian interior;
  SufficientStatsGaussian boundary;
};

ProsodyStats collect_prosody_stats(const TrainState& ts,
                                   const std::vector<ObservationSequence>& data);

// Frame-wise predicted labels from a segmentation: letters from the
// alignment, words from the covering segment's dictionary index.
FrameLabels frame_labels(const Segmentation& seg);

}  // namespace proseg
