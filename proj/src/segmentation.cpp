#include "proseg/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "proseg/numeric.hpp"

namespace proseg {

MatrixXd word_duration_log_pmf(const ModelState& state, const std::vector<int>& word_ids,
                               int max_d) {
  MatrixXd table(word_ids.size(), max_d);
  for (size_t s = 0; s < word_ids.size(); ++s) {
    const auto& word = state.words[word_ids[s]];
    double rate = 0.0;
    for (int letter : word) rate += state.duration_rates[letter];
    const int min_d = static_cast<int>(word.size());
    for (int d = 1; d <= max_d; ++d)
      table(s, d - 1) = log_poisson_duration_min(d, rate, min_d);
  }
  return table;
}

BackwardMessages backward_filter(const LikelihoodCube& cube, const ModelState& state,
                                 int frames, const Hyperparameters& hp) {
  if (cube.words_hash != words_fingerprint(state.words))
    throw std::invalid_argument("backward_filter: cube built against a different dictionary");
  if (cube.frames != frames)
    throw std::invalid_argument("backward_filter: frame count mismatch");
  if (cube.max_duration != std::min(hp.max_word_duration, frames))
    throw std::invalid_argument("backward_filter: cube built under a different truncation");

  const int n_words = state.n_words();
  const int n_slots = static_cast<int>(cube.word_ids.size());
  const int max_d = cube.max_duration;
  const MatrixXd dur_pmf = word_duration_log_pmf(state, cube.word_ids, max_d);

  MatrixXd log_pi = state.pi_lm.array().log();

  BackwardMessages msg;
  msg.beta.setConstant(frames + 1, n_words, kNegInf);
  msg.beta_star.setConstant(frames + 1, n_words, kNegInf);
  msg.beta.row(frames).setZero();  // beta_T := 1

  std::vector<double> terms(max_d);
  for (int t = frames - 1; t >= 0; --t) {
    const int d_hi = std::min(max_d, frames - t);
    for (int s = 0; s < n_slots; ++s) {
      const int i = cube.word_ids[s];
      for (int d = 1; d <= d_hi; ++d)
        terms[d - 1] = msg.beta(t + d, i) + dur_pmf(s, d - 1) + cube.at(s, t, d);
      msg.beta_star(t, i) =
          logsumexp(std::span<const double>(terms.data(), static_cast<size_t>(d_hi)));
    }
    for (int i = 0; i < n_words; ++i) {
      double acc = kNegInf;
      for (int s = 0; s < n_slots; ++s) {
        const int j = cube.word_ids[s];
        acc = log_add(acc, msg.beta_star(t, j) + log_pi(i, j));
      }
      msg.beta(t, i) = acc;
    }
  }
  return msg;
}

Segmentation forward_sample(const BackwardMessages& messages, const LikelihoodCube& cube,
                            const ModelState& state, RandomSource& rng) {
  const int frames = cube.frames;
  const int n_slots = static_cast<int>(cube.word_ids.size());
  const int max_d = cube.max_duration;
  const MatrixXd dur_pmf = word_duration_log_pmf(state, cube.word_ids, max_d);

  Segmentation seg;
  std::vector<double> logw(std::max(n_slots, max_d));
  int t = 0;
  int prev = -1;
  while (t < frames) {
    for (int s = 0; s < n_slots; ++s) {
      const int i = cube.word_ids[s];
      double trans = prev < 0 ? std::log(state.beta_lm[i]) : std::log(state.pi_lm(prev, i));
      logw[s] = trans + messages.beta_star(t, i);
    }
    int slot;
    try {
      slot = rng.categorical_log(logw.data(), n_slots);
    } catch (const std::runtime_error&) {
      throw std::runtime_error(
          "forward_sample: no word admissible at frame " + std::to_string(t) +
          " (max_word_duration too small for this truncation)");
    }
    const int word = cube.word_ids[slot];

    const int d_hi = std::min(max_d, frames - t);
    for (int d = 1; d <= d_hi; ++d)
      logw[d - 1] = cube.at(slot, t, d) + dur_pmf(slot, d - 1) + messages.beta(t + d, word);
    int d;
    try {
      d = 1 + rng.categorical_log(logw.data(), d_hi);
    } catch (const std::runtime_error&) {
      throw std::runtime_error(
          "forward_sample: no admissible duration at frame " + std::to_string(t) +
          " (max_word_duration too small for this truncation)");
    }

    seg.word_labels.push_back(word);
    seg.word_durations.push_back(d);
    t += d;
    prev = word;
  }
  seg.boundary_flags = derive_boundary_flags(seg.word_durations, frames);
  return seg;
}

}  // namespace proseg
