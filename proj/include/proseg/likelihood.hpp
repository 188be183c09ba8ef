#pragma once

#include "proseg/distributions.hpp"
#include "proseg/model_core.hpp"

namespace proseg {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-letter per-frame emission log-likelihoods plus running prefix sums,
// computed once per sweep per sequence and shared by every word. Row-major:
// the segment recursion walks each letter's row as a flat array.
struct FrameLogLik {
  int n_letters = 0;
  int frames = 0;
  RowMatrixXd values;  // n_letters x T
  RowMatrixXd prefix;  // n_letters x (T+1), prefix(j, t) = sum of values(j, 0..t-1)

  double at(int letter, int t) const { return values(letter, t); }
  // sum of values(letter, a..b-1)
  double range_sum(int letter, int a, int b) const {
    return prefix(letter, b) - prefix(letter, a);
  }
};

FrameLogLik letter_frame_loglik(const ObservationSequence& seq, const ModelState& state);

// Boundary/interior prosody scores with prefix sums; zero contribution when
// the model has no prosody channels.
struct ProsodyScores {
  bool enabled = false;
  VectorXd boundary_log;     // log phi_1(Y_t)
  VectorXd interior_prefix;  // prefix sums of log phi_0(Y_t)

  // log-likelihood of the prosody stream for a segment of frames [t, t+d):
  // interior frames score under phi_0, the final frame under phi_1.
  double segment(int t, int d) const {
    if (!enabled) return 0.0;
    return boundary_log[t + d - 1] + (interior_prefix[t + d - 1] - interior_prefix[t]);
  }
};

ProsodyScores prosody_scores(const ObservationSequence& seq, const ModelState& state);

// Direct form of the prosody factor for one segment, frames [t, t+d).
double prosody_segment_loglik(const ObservationSequence& seq, const ModelState& state,
                              int t, int d);

// log p(spectral frames [t, t+d) | word, d): marginalizes the per-letter
// duration composition with the inner forward recursion. -inf when the word
// cannot fit (d < letter count).
double word_segment_loglik(const std::vector<int>& word, const FrameLogLik& fll,
                           const VectorXd& duration_rates, int t, int d);

// Cached log p(spectral + prosody segment | word i, duration d) over all
// start frames and admissible durations, for a chosen subset of words.
struct LikelihoodCube {
  int frames = 0;
  int max_duration = 0;
  std::vector<int> word_ids;      // dictionary indices present in the cube
  std::vector<int> word_lengths;  // letter counts, aligned with word_ids
  std::vector<double> values;     // [slot][t][d-1], -inf where t + d > T
  uint64_t words_hash = 0;

  double at(int slot, int t, int d) const {
    return values[(static_cast<size_t>(slot) * frames + t) * max_duration + (d - 1)];
  }
  int slot_of(int word_id) const;  // -1 when absent
};

LikelihoodCube build_cube(const ObservationSequence& seq, const ModelState& state,
                          const Hyperparameters& hp);
LikelihoodCube build_cube(const ObservationSequence& seq, const ModelState& state,
                          const Hyperparameters& hp, const std::vector<int>& word_ids,
                          int workers = 1);

// Posterior draw of the per-letter durations of `word` over frames [t, t+d),
// proportional to duration pmfs times emission likelihoods. Requires d >= L.
std::vector<int> sample_letter_alignment(const std::vector<int>& word,
                                         const FrameLogLik& fll,
                                         const VectorXd& duration_rates, int t, int d,
                                         RandomSource& rng);

}  // namespace proseg
