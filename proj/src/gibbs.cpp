#include "proseg/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "proseg/eval.hpp"
#include "proseg/numeric.hpp"
#include "proseg/parallel.hpp"

namespace proseg {

namespace {

enum Phase : uint64_t {
  kPhaseInit = 1,
  kPhaseSegmentation = 2,
  kPhaseAlignment = 3,
  kPhaseLetters = 4,
  kPhaseTransitions = 5,
  kPhaseEmissions = 6,
  kPhaseProsody = 7,
  kPhaseFresh = 8,
};

// Letter successions exclude self-transitions: a letter following itself is
// indistinguishable from a longer duration, which the duration pmf already
// models. Rows are renormalized off the diagonal (explicit-duration HSMM
// convention). Word transitions keep their diagonal: adjacent repeats of the
// same word are distinct tokens.
MatrixXd letter_transition_log(const ModelState& state) {
  MatrixXd out = state.pi_wm;
  const int k = static_cast<int>(out.rows());
  if (k == 1) return MatrixXd::Zero(1, 1);  // a lone letter must chain to itself
  for (int j = 0; j < k; ++j) {
    out(j, j) = 0.0;
    double total = out.row(j).sum();
    if (total > 0.0) {
      out.row(j) /= total;
    } else {
      out.row(j).setConstant(1.0 / (k - 1));
      out(j, j) = 0.0;
    }
  }
  return out.array().log();
}

// Letter-level explicit-duration decoder for one segment: backward messages
// computed once, forward draws repeatable (rejection against the dictionary
// length cap reuses the messages).
class LetterDecoder {
 public:
  LetterDecoder(const FrameLogLik& fll, const ModelState& state, int start, int duration)
      : fll_(fll), state_(state), start_(start), duration_(duration) {
    const int n_letters = state.n_letters();
    const int d = duration;
    log_dur_.resize(n_letters, d);
    for (int j = 0; j < n_letters; ++j)
      for (int dd = 1; dd <= d; ++dd)
        log_dur_(j, dd - 1) = log_poisson_duration(dd, state.duration_rates[j]);
    log_pi_ = letter_transition_log(state);
    log_base_ = state.beta_wm.array().log();

    beta_.setConstant(d + 1, n_letters, kNegInf);
    beta_star_.setConstant(d + 1, n_letters, kNegInf);
    beta_.row(d).setZero();
    std::vector<double> terms(d);
    for (int tau = d - 1; tau >= 0; --tau) {
      for (int j = 0; j < n_letters; ++j) {
        const int hi = d - tau;
        for (int dd = 1; dd <= hi; ++dd)
          terms[dd - 1] = beta_(tau + dd, j) + log_dur_(j, dd - 1) +
                          fll.range_sum(j, start + tau, start + tau + dd);
        beta_star_(tau, j) =
            logsumexp(std::span<const double>(terms.data(), static_cast<size_t>(hi)));
      }
      for (int j = 0; j < n_letters; ++j) {
        double acc = kNegInf;
        for (int j2 = 0; j2 < n_letters; ++j2)
          acc = log_add(acc, beta_star_(tau, j2) + log_pi_(j, j2));
        beta_(tau, j) = acc;
      }
    }
  }

  std::vector<int> sample(RandomSource& rng) const {
    const int n_letters = state_.n_letters();
    std::vector<int> labels;
    std::vector<double> w(std::max(n_letters, duration_));
    int tau = 0;
    int prev = -1;
    while (tau < duration_) {
      for (int j = 0; j < n_letters; ++j)
        w[j] = (prev < 0 ? log_base_[j] : log_pi_(prev, j)) + beta_star_(tau, j);
      int j = rng.categorical_log(w.data(), n_letters);
      const int hi = duration_ - tau;
      for (int dd = 1; dd <= hi; ++dd)
        w[dd - 1] = log_dur_(j, dd - 1) +
                    fll_.range_sum(j, start_ + tau, start_ + tau + dd) + beta_(tau + dd, j);
      int dd = 1 + rng.categorical_log(w.data(), hi);
      labels.push_back(j);
      tau += dd;
      prev = j;
    }
    return labels;
  }

  // Rejection against the length cap; falls back to truncation after many
  // tries (only reachable with extreme duration rates).
  std::vector<int> sample_capped(int max_length, RandomSource& rng) const {
    for (int attempt = 0; attempt < 100; ++attempt) {
      auto labels = sample(rng);
      if (static_cast<int>(labels.size()) <= max_length) return labels;
    }
    auto labels = sample(rng);
    labels.resize(max_length);
    return labels;
  }

 private:
  const FrameLogLik& fll_;
  const ModelState& state_;
  int start_;
  int duration_;
  MatrixXd log_dur_;
  MatrixXd log_pi_;
  VectorXd log_base_;
  MatrixXd beta_;
  MatrixXd beta_star_;
};

// Draws the per-letter durations for every segment and writes the frame-wise
// letter labels.
void align_segments(Segmentation& seg, const FrameLogLik& fll, const ModelState& state,
                    RandomSource& rng) {
  const int frames = fll.frames;
  seg.letter_labels.assign(frames, 0);
  seg.letter_durations.clear();
  seg.letter_durations.reserve(seg.word_labels.size());
  int t = 0;
  for (size_t s = 0; s < seg.word_labels.size(); ++s) {
    const auto& word = state.words[seg.word_labels[s]];
    auto durations =
        sample_letter_alignment(word, fll, state.duration_rates, t, seg.word_durations[s], rng);
    int tt = t;
    for (size_t k = 0; k < word.size(); ++k) {
      std::fill(seg.letter_labels.begin() + tt, seg.letter_labels.begin() + tt + durations[k],
                word[k]);
      tt += durations[k];
    }
    seg.letter_durations.push_back(std::move(durations));
    t += seg.word_durations[s];
  }
}

void resample_hdp_block(VectorXd& beta, MatrixXd& pi, const MatrixXd& counts, double gamma,
                        double alpha, RandomSource& rng) {
  const int k = static_cast<int>(beta.size());
  VectorXd tables = VectorXd::Zero(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      long n = static_cast<long>(counts(i, j));
      if (n > 0) tables[j] += sample_table_count(n, alpha * beta[j], rng);
    }
  beta = sample_dirichlet(VectorXd::Constant(k, gamma / k) + tables, rng);
  for (int i = 0; i < k; ++i) {
    VectorXd conc = alpha * beta + counts.row(i).transpose();
    pi.row(i) = sample_dirichlet(conc, rng).transpose();
  }
}

std::vector<int> cube_word_list(const TrainState& ts, const Hyperparameters& hp,
                                int fresh_words, RandomSource& rng) {
  std::vector<char> used(hp.max_words, 0);
  for (const auto& seg : ts.segmentations)
    for (int z : seg.word_labels) used[z] = 1;
  std::vector<int> list, unused;
  for (int i = 0; i < hp.max_words; ++i)
    (used[i] ? list : unused).push_back(i);
  int take = std::min<int>(fresh_words, static_cast<int>(unused.size()));
  for (int k = 0; k < take; ++k) {
    int pick = k + rng.uniform_int(0, static_cast<int>(unused.size()) - 1 - k);
    std::swap(unused[k], unused[pick]);
    list.push_back(unused[k]);
  }
  std::sort(list.begin(), list.end());
  return list;
}

void check_data(const std::vector<ObservationSequence>& data, const Hyperparameters& hp) {
  if (data.empty()) throw std::invalid_argument("no sequences given");
  for (const auto& seq : data) seq.check();
  const int dy = static_cast<int>(data.front().spectral.cols());
  const int dp = static_cast<int>(data.front().prosody.cols());
  for (const auto& seq : data)
    if (seq.spectral.cols() != dy || seq.prosody.cols() != dp)
      throw std::invalid_argument("sequences disagree on feature dimensions");
  if (hp.emission_niw.dim() != dy)
    throw std::invalid_argument("emission prior dimension does not match the data");
  if (dp > 0 && (hp.prosody_niw_boundary.dim() != dp || hp.prosody_niw_interior.dim() != dp))
    throw std::invalid_argument("prosody prior dimension does not match the data");
}

}  // namespace

ModelState sample_prior_state(const Hyperparameters& hp, int spectral_dim, int prosody_dim,
                              RandomSource& rng) {
  hp.check();
  if (hp.emission_niw.dim() != spectral_dim)
    throw std::invalid_argument("emission prior dimension mismatch");
  const int n = hp.max_words;
  const int k = hp.max_letters;

  ModelState state;
  state.beta_lm = sample_dirichlet(VectorXd::Constant(n, hp.gamma_lm / n), rng);
  state.pi_lm.resize(n, n);
  for (int i = 0; i < n; ++i)
    state.pi_lm.row(i) = sample_dirichlet(hp.alpha_lm * state.beta_lm, rng).transpose();
  state.beta_wm = sample_dirichlet(VectorXd::Constant(k, hp.gamma_wm / k), rng);
  state.pi_wm.resize(k, k);
  for (int j = 0; j < k; ++j)
    state.pi_wm.row(j) = sample_dirichlet(hp.alpha_wm * state.beta_wm, rng).transpose();

  SufficientStatsGaussian empty = SufficientStatsGaussian::zero(spectral_dim);
  state.emission_params.resize(k);
  for (int j = 0; j < k; ++j)
    state.emission_params[j] = sample_niw_gaussian(hp.emission_niw, empty, rng);
  state.duration_rates.resize(k);
  for (int j = 0; j < k; ++j)
    state.duration_rates[j] =
        sample_gamma_poisson_rate(hp.duration_shape, hp.duration_rate, {}, rng);

  state.words.resize(n);
  for (int i = 0; i < n; ++i) state.words[i] = sample_prior_word(state, hp, rng);

  if (prosody_dim > 0) {
    if (hp.prosody_niw_boundary.dim() != prosody_dim ||
        hp.prosody_niw_interior.dim() != prosody_dim)
      throw std::invalid_argument("prosody prior dimension mismatch");
    SufficientStatsGaussian none = SufficientStatsGaussian::zero(prosody_dim);
    state.prosody_interior = sample_niw_gaussian(hp.prosody_niw_interior, none, rng);
    state.prosody_boundary = sample_niw_gaussian(hp.prosody_niw_boundary, none, rng);
  }
  return state;
}

std::vector<int> sample_prior_word(const ModelState& state, const Hyperparameters& hp,
                                   RandomSource& rng) {
  int length = rng.uniform_int(1, hp.max_word_length);
  std::vector<int> word(length);
  word[0] = rng.categorical(state.beta_wm.data(), state.n_letters());
  if (length == 1) return word;
  MatrixXd chain = letter_transition_log(state).array().exp();
  for (int k = 1; k < length; ++k) {
    VectorXd row = chain.row(word[k - 1]);
    word[k] = rng.categorical(row.data(), state.n_letters());
  }
  return word;
}

TrainState init(const std::vector<ObservationSequence>& data, const Hyperparameters& hp,
                uint64_t seed, const GibbsOptions& opts) {
  check_data(data, hp);
  const int dy = static_cast<int>(data.front().spectral.cols());
  const int dp = static_cast<int>(data.front().prosody.cols());

  TrainState ts;
  ts.rng_seed = seed;
  RandomSource rng(derive_seed(seed, 0, kPhaseInit));
  ts.model = sample_prior_state(hp, dy, dp, rng);
  ts.segmentations.resize(data.size());

  parallel_for(static_cast<int>(data.size()), opts.workers, [&](int i) {
    const auto cube = build_cube(data[i], ts.model, hp);
    const auto messages = backward_filter(cube, ts.model, data[i].frames(), hp);
    RandomSource seg_rng(derive_seed(seed, 0, kPhaseSegmentation, i));
    ts.segmentations[i] = forward_sample(messages, cube, ts.model, seg_rng);
    const auto fll = letter_frame_loglik(data[i], ts.model);
    RandomSource align_rng(derive_seed(seed, 0, kPhaseAlignment, i));
    align_segments(ts.segmentations[i], fll, ts.model, align_rng);
  });
  return ts;
}

std::vector<int> resample_word_letters(int word_index,
                                       const std::vector<SegmentRef>& segments,
                                       const std::vector<ObservationSequence>& data,
                                       const std::vector<FrameLogLik>& frame_tables,
                                       const ModelState& state, const Hyperparameters& hp,
                                       RandomSource& rng) {
  (void)word_index;
  (void)data;
  if (segments.empty())
    throw std::invalid_argument("resample_word_letters: word has no segments");
  int min_duration = segments.front().duration;
  for (const auto& s : segments) min_duration = std::min(min_duration, s.duration);

  std::vector<std::vector<int>> decodes;
  decodes.reserve(segments.size());
  for (const auto& s : segments) {
    LetterDecoder decoder(frame_tables[s.sequence], state, s.start, s.duration);
    decodes.push_back(decoder.sample_capped(hp.max_word_length, rng));
  }
  // only decodes that fit every assigned segment may become the entry; the
  // shortest segment's decode always qualifies
  std::vector<int> feasible;
  for (size_t i = 0; i < decodes.size(); ++i)
    if (static_cast<int>(decodes[i].size()) <= min_duration)
      feasible.push_back(static_cast<int>(i));
  int pick = feasible[rng.uniform_int(0, static_cast<int>(feasible.size()) - 1)];
  return decodes[pick];
}

TransitionCounts count_transitions(const TrainState& ts, const Hyperparameters& hp) {
  TransitionCounts counts;
  counts.word_bigrams = MatrixXd::Zero(hp.max_words, hp.max_words);
  counts.letter_bigrams = MatrixXd::Zero(hp.max_letters, hp.max_letters);
  counts.word_occurrences.assign(hp.max_words, 0);
  for (const auto& seg : ts.segmentations) {
    for (size_t s = 0; s < seg.word_labels.size(); ++s) {
      ++counts.word_occurrences[seg.word_labels[s]];
      if (s > 0) counts.word_bigrams(seg.word_labels[s - 1], seg.word_labels[s]) += 1.0;
    }
  }
  for (int i = 0; i < hp.max_words; ++i) {
    if (counts.word_occurrences[i] == 0) continue;
    const auto& word = ts.model.words[i];
    for (size_t k = 1; k < word.size(); ++k)
      counts.letter_bigrams(word[k - 1], word[k]) +=
          static_cast<double>(counts.word_occurrences[i]);
  }
  return counts;
}

LetterStats collect_letter_stats(const TrainState& ts,
                                 const std::vector<ObservationSequence>& data) {
  const int n_letters = ts.model.n_letters();
  const int dy = ts.model.spectral_dim();
  LetterStats stats;
  stats.gaussian.assign(n_letters, SufficientStatsGaussian::zero(dy));
  stats.poisson.assign(n_letters, {});
  for (size_t i = 0; i < data.size(); ++i) {
    const auto& seg = ts.segmentations[i];
    int t = 0;
    for (const auto& durations : seg.letter_durations) {
      for (int d : durations) {
        const int letter = seg.letter_labels[t];
        stats.poisson[letter].add(d);
        for (int u = 0; u < d; ++u)
          stats.gaussian[letter].add(data[i].spectral.row(t + u).transpose());
        t += d;
      }
    }
  }
  return stats;
}

ProsodyStats collect_prosody_stats(const TrainState& ts,
                                   const std::vector<ObservationSequence>& data) {
  const int dp = ts.model.prosody_dim();
  ProsodyStats stats{SufficientStatsGaussian::zero(dp), SufficientStatsGaussian::zero(dp)};
  if (dp == 0) return stats;
  for (size_t i = 0; i < data.size(); ++i) {
    const auto& flags = ts.segmentations[i].boundary_flags;
    for (int t = 0; t < data[i].frames(); ++t) {
      VectorXd y = data[i].prosody.row(t).transpose();
      (flags[t] ? stats.boundary : stats.interior).add(y);
    }
  }
  return stats;
}

FrameLabels frame_labels(const Segmentation& seg) {
  FrameLabels labels;
  labels.letters = seg.letter_labels;
  labels.words.reserve(seg.letter_labels.size());
  for (size_t s = 0; s < seg.word_labels.size(); ++s)
    labels.words.insert(labels.words.end(), seg.word_durations[s], seg.word_labels[s]);
  return labels;
}

double log_joint_score(const TrainState& ts, const std::vector<ObservationSequence>& data,
                       const Hyperparameters& hp, int workers) {
  hp.check();
  std::vector<double> scores(data.size(), 0.0);
  parallel_for(static_cast<int>(data.size()), workers, [&](int i) {
    const auto& seg = ts.segmentations[i];
    const auto fll = letter_frame_loglik(data[i], ts.model);
    const auto prosody = prosody_scores(data[i], ts.model);
    double score = 0.0;
    int t = 0;
    for (size_t s = 0; s < seg.word_labels.size(); ++s) {
      const int word_id = seg.word_labels[s];
      const int d = seg.word_durations[s];
      score += s == 0 ? std::log(ts.model.beta_lm[word_id])
                      : std::log(ts.model.pi_lm(seg.word_labels[s - 1], word_id));
      const auto& word = ts.model.words[word_id];
      double rate = 0.0;
      for (int letter : word) rate += ts.model.duration_rates[letter];
      score += log_poisson_duration_min(d, rate, static_cast<int>(word.size()));
      score += word_segment_loglik(word, fll, ts.model.duration_rates, t, d);
      score += prosody.segment(t, d);
      t += d;
    }
    scores[i] = score;
  });
  return std::accumulate(scores.begin(), scores.end(), 0.0);
}

void sweep(TrainState& ts, const std::vector<ObservationSequence>& data,
           const Hyperparameters& hp, const GibbsOptions& opts,
           const std::vector<FrameLabels>* truth) {
  const auto start_time = std::chrono::steady_clock::now();
  check_data(data, hp);
  if (ts.segmentations.size() != data.size())
    throw std::invalid_argument("sweep: state/data sequence count mismatch");
  const uint64_t seed = ts.rng_seed;
  const uint64_t s = static_cast<uint64_t>(ts.sweep_index) + 1;
  const int n_seqs = static_cast<int>(data.size());

  // (1)+(2) likelihood cubes and segmentation resampling
  {
    RandomSource fresh_rng(derive_seed(seed, s, kPhaseFresh));
    const std::vector<int> word_list = cube_word_list(ts, hp, opts.fresh_words, fresh_rng);
    parallel_for(n_seqs, opts.workers, [&](int i) {
      const auto cube = build_cube(data[i], ts.model, hp, word_list);
      const auto messages = backward_filter(cube, ts.model, data[i].frames(), hp);
      RandomSource seg_rng(derive_seed(seed, s, kPhaseSegmentation, i));
      ts.segmentations[i] = forward_sample(messages, cube, ts.model, seg_rng);
    });
  }

  // shared frame tables for the letter-level phases
  std::vector<FrameLogLik> frame_tables(n_seqs);
  parallel_for(n_seqs, opts.workers,
               [&](int i) { frame_tables[i] = letter_frame_loglik(data[i], ts.model); });

  // (3) word letter sequences
  {
    std::vector<std::vector<SegmentRef>> assigned(hp.max_words);
    for (int i = 0; i < n_seqs; ++i) {
      const auto& seg = ts.segmentations[i];
      int t = 0;
      for (size_t k = 0; k < seg.word_labels.size(); ++k) {
        assigned[seg.word_labels[k]].push_back({i, t, seg.word_durations[k]});
        t += seg.word_durations[k];
      }
    }
    std::vector<std::vector<int>> new_words(hp.max_words);
    parallel_for(hp.max_words, opts.workers, [&](int w) {
      RandomSource rng(derive_seed(seed, s, kPhaseLetters, w));
      if (assigned[w].empty())
        new_words[w] = sample_prior_word(ts.model, hp, rng);
      else
        new_words[w] =
            resample_word_letters(w, assigned[w], data, frame_tables, ts.model, hp, rng);
    });
    ts.model.words = std::move(new_words);
  }

  // (3b) letter alignments under the refreshed dictionary
  parallel_for(n_seqs, opts.workers, [&](int i) {
    RandomSource rng(derive_seed(seed, s, kPhaseAlignment, i));
    align_segments(ts.segmentations[i], frame_tables[i], ts.model, rng);
  });

  // (4) transition structure
  {
    RandomSource rng(derive_seed(seed, s, kPhaseTransitions));
    const TransitionCounts counts = count_transitions(ts, hp);
    resample_hdp_block(ts.model.beta_lm, ts.model.pi_lm, counts.word_bigrams, hp.gamma_lm,
                       hp.alpha_lm, rng);
    resample_hdp_block(ts.model.beta_wm, ts.model.pi_wm, counts.letter_bigrams, hp.gamma_wm,
                       hp.alpha_wm, rng);
  }

  // (5) emission and duration parameters
  {
    RandomSource rng(derive_seed(seed, s, kPhaseEmissions));
    const LetterStats stats = collect_letter_stats(ts, data);
    for (int j = 0; j < hp.max_letters; ++j) {
      ts.model.emission_params[j] = sample_niw_gaussian(hp.emission_niw, stats.gaussian[j], rng);
      ts.model.duration_rates[j] =
          sample_gamma_poisson_rate(hp.duration_shape, hp.duration_rate, stats.poisson[j], rng);
    }
  }

  // (6) prosody parameters
  if (ts.model.has_prosody()) {
    RandomSource rng(derive_seed(seed, s, kPhaseProsody));
    const ProsodyStats stats = collect_prosody_stats(ts, data);
    ts.model.prosody_interior =
        sample_niw_gaussian(hp.prosody_niw_interior, stats.interior, rng);
    ts.model.prosody_boundary =
        sample_niw_gaussian(hp.prosody_niw_boundary, stats.boundary, rng);
  }

  ++ts.sweep_index;

  TraceEntry entry;
  entry.log_joint = log_joint_score(ts, data, hp, opts.workers);
  if (truth) {
    std::vector<int> pred_letters, pred_words, true_letters, true_words;
    for (int i = 0; i < n_seqs; ++i) {
      const FrameLabels pred = frame_labels(ts.segmentations[i]);
      pred_letters.insert(pred_letters.end(), pred.letters.begin(), pred.letters.end());
      pred_words.insert(pred_words.end(), pred.words.begin(), pred.words.end());
      true_letters.insert(true_letters.end(), (*truth)[i].letters.begin(),
                          (*truth)[i].letters.end());
      true_words.insert(true_words.end(), (*truth)[i].words.begin(), (*truth)[i].words.end());
    }
    entry.letter_ari = adjusted_rand_index(true_letters, pred_letters);
    entry.word_ari = adjusted_rand_index(true_words, pred_words);
  }
  entry.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            start_time)
                      .count();
  ts.trace.push_back(entry);
}

TrainState run(const std::vector<ObservationSequence>& data, const Hyperparameters& hp,
               uint64_t seed, int n_sweeps, const GibbsOptions& opts,
               const std::vector<FrameLabels>* truth, const SweepCallback& after_sweep) {
  if (n_sweeps < 1) throw std::invalid_argument("run: n_sweeps must be at least 1");
  TrainState ts = init(data, hp, seed, opts);
  resume(ts, data, hp, n_sweeps, opts, truth, after_sweep);
  return ts;
}

void resume(TrainState& ts, const std::vector<ObservationSequence>& data,
            const Hyperparameters& hp, int n_sweeps, const GibbsOptions& opts,
            const std::vector<FrameLabels>* truth, const SweepCallback& after_sweep) {
  while (ts.sweep_index < n_sweeps) {
    sweep(ts, data, hp, opts, truth);
    if (after_sweep) after_sweep(ts);
  }
}

}  // namespace proseg
