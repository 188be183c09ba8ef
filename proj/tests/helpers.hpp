#pragma once

// shared toy-model builders for the unit and acceptance suites

#include <vector>

#include "proseg/gibbs.hpp"
#include "proseg/numeric.hpp"

namespace proseg::testing {

inline Hyperparameters toy_hp(int dy, int dp, int max_words, int max_letters,
                              int max_word_duration, int max_word_length) {
  Hyperparameters hp;
  hp.max_words = max_words;
  hp.max_letters = max_letters;
  hp.max_word_duration = max_word_duration;
  hp.max_word_length = max_word_length;
  hp.emission_niw = NIWParams::isotropic(dy, 0.0, 0.01, 1.0, dy + 2);
  if (dp > 0) {
    hp.prosody_niw_boundary = NIWParams::isotropic(dp, 1.0, 2.0, 1.0, dp + 2);
    hp.prosody_niw_interior = NIWParams::isotropic(dp, 0.0, 100.0, 1.0, dp + 2);
  }
  return hp;
}

// deterministic hand-built model: letter emissions N(j * spread, I), shared
// duration rate, uniform transitions
inline ModelState toy_state(const Hyperparameters& hp, int dy, int dp,
                            const std::vector<std::vector<int>>& words,
                            double duration_rate = 3.0, double spread = 4.0) {
  ModelState state;
  const int n = hp.max_words;
  const int k = hp.max_letters;
  state.beta_lm = VectorXd::Constant(n, 1.0 / n);
  state.pi_lm = MatrixXd::Constant(n, n, 1.0 / n);
  state.beta_wm = VectorXd::Constant(k, 1.0 / k);
  state.pi_wm = MatrixXd::Constant(k, k, 1.0 / k);
  state.words = words;
  state.words.resize(n, {0});
  state.emission_params.resize(k);
  for (int j = 0; j < k; ++j)
    state.emission_params[j] =
        Gaussian{VectorXd::Constant(dy, j * spread), MatrixXd::Identity(dy, dy)};
  state.duration_rates = VectorXd::Constant(k, duration_rate);
  if (dp > 0) {
    state.prosody_interior = Gaussian{VectorXd::Zero(dp), MatrixXd::Identity(dp, dp)};
    state.prosody_boundary = Gaussian{VectorXd::Ones(dp), MatrixXd::Identity(dp, dp)};
  }
  return state;
}

inline ObservationSequence random_sequence(int frames, int dy, int dp, RandomSource& rng,
                                           double scale = 3.0) {
  ObservationSequence seq;
  seq.id = "toy";
  seq.spectral.resize(frames, dy);
  seq.prosody.resize(frames, dp);
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < dy; ++c) seq.spectral(t, c) = rng.uniform(-scale, scale);
    for (int c = 0; c < dp; ++c) seq.prosody(t, c) = rng.uniform(-1.0, 2.0);
  }
  return seq;
}

// brute force over every letter-duration composition of d frames
inline double brute_force_word_loglik(const std::vector<int>& word, const FrameLogLik& fll,
                                      const VectorXd& rates, int t, int d) {
  const int length = static_cast<int>(word.size());
  double total = kNegInf;
  std::vector<int> r(length);
  auto rec = [&](auto&& self, int k, int used, double acc) -> void {
    if (k == length) {
      if (used == d) total = log_add(total, acc);
      return;
    }
    const int remaining_letters = length - k - 1;
    for (int dur = 1; dur + used + remaining_letters <= d; ++dur) {
      double term = log_poisson_duration(dur, rates[word[k]]) +
                    fll.range_sum(word[k], t + used, t + used + dur);
      self(self, k + 1, used + dur, acc + term);
    }
  };
  rec(rec, 0, 0, 0.0);
  return total;
}

}  // namespace proseg::testing
