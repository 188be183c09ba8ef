#pragma once

#include "proseg/likelihood.hpp"

namespace proseg {

// Log-domain backward messages over frame boundaries t = 0..T.
// beta(t, i): future likelihood given a word ends at t and the chain sits in
// word i. beta_star(t, i): future likelihood given word i starts at t+1.
// Columns for words outside the cube stay at -inf.
struct BackwardMessages {
  MatrixXd beta;       // (T+1) x max_words
  MatrixXd beta_star;  // (T+1) x max_words
};

// Word-level duration pmf table: row per cube slot, log p(d | word), with the
// word's rate the sum of its letters' rates and mass restricted to d >= L.
MatrixXd word_duration_log_pmf(const ModelState& state, const std::vector<int>& word_ids,
                               int max_d);

BackwardMessages backward_filter(const LikelihoodCube& cube, const ModelState& state,
                                 int frames, const Hyperparameters& hp);

// Draws one word-level segmentation (labels + durations; letter fields left
// empty). The first word follows the global base distribution, subsequent
// words the bigram row of their predecessor.
Segmentation forward_sample(const BackwardMessages& messages, const LikelihoodCube& cube,
                            const ModelState& state, RandomSource& rng);

}  // namespace proseg
