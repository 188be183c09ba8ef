#include "proseg/likelihood.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "proseg/numeric.hpp"

namespace proseg {

namespace {

// Terms more than this far below the running maximum cannot move a
// log-sum-exp at double precision (90 * e^-45 < 1e-17 relative).
constexpr double kLseCutoff = 45.0;

}  // namespace

FrameLogLik letter_frame_loglik(const ObservationSequence& seq, const ModelState& state) {
  const int n_letters = state.n_letters();
  const int frames = seq.frames();
  FrameLogLik fll;
  fll.n_letters = n_letters;
  fll.frames = frames;
  fll.values.resize(n_letters, frames);
  fll.prefix.resize(n_letters, frames + 1);
  for (int j = 0; j < n_letters; ++j) {
    GaussianEval eval(state.emission_params[j]);
    for (int t = 0; t < frames; ++t) fll.values(j, t) = eval(seq.spectral.row(t).transpose());
    fll.prefix(j, 0) = 0.0;
    for (int t = 0; t < frames; ++t) fll.prefix(j, t + 1) = fll.prefix(j, t) + fll.values(j, t);
  }
  return fll;
}

ProsodyScores prosody_scores(const ObservationSequence& seq, const ModelState& state) {
  ProsodyScores ps;
  if (!state.has_prosody()) return ps;
  if (seq.prosody.cols() != state.prosody_dim())
    throw std::invalid_argument("prosody dimension mismatch between data and model");
  const int frames = seq.frames();
  ps.enabled = true;
  ps.boundary_log.resize(frames);
  ps.interior_prefix.resize(frames + 1);
  GaussianEval interior(state.prosody_interior);
  GaussianEval boundary(state.prosody_boundary);
  ps.interior_prefix[0] = 0.0;
  for (int t = 0; t < frames; ++t) {
    VectorXd y = seq.prosody.row(t).transpose();
    ps.boundary_log[t] = boundary(y);
    ps.interior_prefix[t + 1] = ps.interior_prefix[t] + interior(y);
  }
  return ps;
}

double prosody_segment_loglik(const ObservationSequence& seq, const ModelState& state,
                              int t, int d) {
  if (d < 1 || t < 0 || t + d > seq.frames())
    throw std::invalid_argument("prosody_segment_loglik: frames out of range");
  if (!state.has_prosody()) return 0.0;
  GaussianEval interior(state.prosody_interior);
  GaussianEval boundary(state.prosody_boundary);
  double total = boundary(seq.prosody.row(t + d - 1).transpose());
  for (int k = 0; k < d - 1; ++k) total += interior(seq.prosody.row(t + k).transpose());
  return total;
}

namespace {

// Shared inner recursion. level_prev/level_cur hold A_{k-1}(m) and A_k(m):
// the log-probability that the first k letters of the word cover exactly the
// first m frames of the segment starting at t. Durations of letter l follow
// the truncated Poisson; emissions come from the prefix-summed frame table.
//
// A_k(m) = P_l[t+m] + logsumexp_u( A_{k-1}(u) - P_l[t+u] + logdur_l(m-u) )
//
// The duration table is stored reversed so the inner scan walks two
// contiguous arrays; the log-sum-exp runs max-first with a cutoff so exp is
// only paid for terms that can contribute.
struct WordRecursionWorkspace {
  std::vector<double> level_prev, level_cur, shifted;
  std::vector<double> dur_rev;  // per letter, filled by caller

  void resize(int max_m) {
    level_prev.assign(max_m + 1, kNegInf);
    level_cur.assign(max_m + 1, kNegInf);
    shifted.assign(max_m + 1, 0.0);
  }
};

// Fills out[m] = A_K(m) for m = 0..max_m, where K = word length.
// dur_rev_all holds, per letter index j, the reversed duration table
// dur_rev_all[j][x] = log g(table_d - x | omega_j) for x = 0..table_d-1.
void word_forward_levels(const std::vector<int>& word, const FrameLogLik& fll,
                         const std::vector<std::vector<double>>& dur_rev_all,
                         int table_d, int t, int max_m, WordRecursionWorkspace& ws,
                         std::vector<std::vector<double>>* all_levels) {
  const int length = static_cast<int>(word.size());
  ws.resize(max_m);
  ws.level_prev[0] = 0.0;  // A_0(0) = 1
  if (all_levels) {
    all_levels->assign(length + 1, std::vector<double>(max_m + 1, kNegInf));
    (*all_levels)[0][0] = 0.0;
  }
  for (int k = 1; k <= length; ++k) {
    const int letter = word[k - 1];
    const double* prefix = &fll.prefix(letter, 0);
    const double* dur_rev = dur_rev_all[letter].data();
    double* shifted = ws.shifted.data();
    // shifted(u) = A_{k-1}(u) - P[t+u]; only u >= k-1 can be finite
    for (int u = k - 1; u < max_m; ++u)
      shifted[u] = ws.level_prev[u] - prefix[t + u];
    std::fill(ws.level_cur.begin(), ws.level_cur.end(), kNegInf);
    for (int m = k; m <= max_m; ++m) {
      const int u_lo = k - 1;
      const int u_hi = m - 1;  // duration m-u ranges 1..m-k+1
      const double* rev = dur_rev + (table_d - m);
      double vmax = kNegInf;
      for (int u = u_lo; u <= u_hi; ++u) {
        double v = shifted[u] + rev[u];
        if (v > vmax) vmax = v;
      }
      if (vmax == kNegInf) continue;
      double s = 0.0;
      const double cut = vmax - kLseCutoff;
      for (int u = u_lo; u <= u_hi; ++u) {
        double v = shifted[u] + rev[u];
        if (v >= cut) s += std::exp(v - vmax);
      }
      ws.level_cur[m] = prefix[t + m] + vmax + std::log(s);
    }
    if (all_levels) (*all_levels)[k] = ws.level_cur;
    std::swap(ws.level_prev, ws.level_cur);
  }
}

std::vector<std::vector<double>> reversed_duration_tables(const VectorXd& rates,
                                                          int table_d) {
  std::vector<std::vector<double>> tables(rates.size());
  for (int j = 0; j < rates.size(); ++j) {
    tables[j].resize(table_d);
    for (int d = 1; d <= table_d; ++d)
      tables[j][table_d - d] = log_poisson_duration(d, rates[j]);
  }
  return tables;
}

}  // namespace

double word_segment_loglik(const std::vector<int>& word, const FrameLogLik& fll,
                           const VectorXd& duration_rates, int t, int d) {
  if (word.empty()) throw std::invalid_argument("word_segment_loglik: empty word");
  if (d < 1 || t < 0 || t + d > fll.frames)
    throw std::invalid_argument("word_segment_loglik: frames out of range");
  if (d < static_cast<int>(word.size())) return kNegInf;
  auto dur_rev = reversed_duration_tables(duration_rates, d);
  WordRecursionWorkspace ws;
  word_forward_levels(word, fll, dur_rev, d, t, d, ws, nullptr);
  return ws.level_prev[d];
}

int LikelihoodCube::slot_of(int word_id) const {
  for (size_t s = 0; s < word_ids.size(); ++s)
    if (word_ids[s] == word_id) return static_cast<int>(s);
  return -1;
}

LikelihoodCube build_cube(const ObservationSequence& seq, const ModelState& state,
                          const Hyperparameters& hp) {
  std::vector<int> all(state.words.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return build_cube(seq, state, hp, all);
}

LikelihoodCube build_cube(const ObservationSequence& seq, const ModelState& state,
                          const Hyperparameters& hp, const std::vector<int>& word_ids,
                          int workers) {
  seq.check();
  const int frames = seq.frames();
  const int max_d = std::min(hp.max_word_duration, frames);
  const int n_slots = static_cast<int>(word_ids.size());

  LikelihoodCube cube;
  cube.frames = frames;
  cube.max_duration = max_d;
  cube.word_ids = word_ids;
  cube.word_lengths.resize(n_slots);
  for (int s = 0; s < n_slots; ++s)
    cube.word_lengths[s] = static_cast<int>(state.words[word_ids[s]].size());
  cube.words_hash = words_fingerprint(state.words);
  cube.values.assign(static_cast<size_t>(n_slots) * frames * max_d, kNegInf);

  const FrameLogLik fll = letter_frame_loglik(seq, state);
  const ProsodyScores prosody = prosody_scores(seq, state);
  const auto dur_rev = reversed_duration_tables(state.duration_rates, max_d);

  auto fill_slot = [&](int slot) {
    const auto& word = state.words[word_ids[slot]];
    WordRecursionWorkspace ws;
    for (int t = 0; t < frames; ++t) {
      const int local_max = std::min(max_d, frames - t);
      word_forward_levels(word, fll, dur_rev, max_d, t, local_max, ws, nullptr);
      double* row = &cube.values[(static_cast<size_t>(slot) * frames + t) * max_d];
      for (int d = 1; d <= local_max; ++d) {
        double v = ws.level_prev[d];
        if (v != kNegInf) v += prosody.segment(t, d);
        row[d - 1] = v;
      }
    }
  };

  if (workers <= 1 || n_slots <= 1) {
    for (int s = 0; s < n_slots; ++s) fill_slot(s);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    int n_threads = std::min(workers, n_slots);
    for (int w = 0; w < n_threads; ++w)
      pool.emplace_back([&] {
        for (int s = next.fetch_add(1); s < n_slots; s = next.fetch_add(1)) fill_slot(s);
      });
    for (auto& th : pool) th.join();
  }
  return cube;
}

std::vector<int> sample_letter_alignment(const std::vector<int>& word,
                                         const FrameLogLik& fll,
                                         const VectorXd& duration_rates, int t, int d,
                                         RandomSource& rng) {
  const int length = static_cast<int>(word.size());
  if (length == 0) throw std::invalid_argument("sample_letter_alignment: empty word");
  if (d < length)
    throw std::invalid_argument("sample_letter_alignment: segment shorter than word");
  if (t < 0 || t + d > fll.frames)
    throw std::invalid_argument("sample_letter_alignment: frames out of range");

  auto dur_rev = reversed_duration_tables(duration_rates, d);
  WordRecursionWorkspace ws;
  std::vector<std::vector<double>> levels;
  word_forward_levels(word, fll, dur_rev, d, t, d, ws, &levels);
  if (levels[length][d] == kNegInf)
    throw std::runtime_error("sample_letter_alignment: no admissible composition");

  // backward draw of each letter's duration, last letter first
  std::vector<int> durations(length);
  int m = d;
  std::vector<double> logw;
  for (int k = length; k >= 1; --k) {
    const int letter = word[k - 1];
    const int d_hi = m - (k - 1);
    logw.assign(d_hi, kNegInf);
    for (int dd = 1; dd <= d_hi; ++dd) {
      double prev = levels[k - 1][m - dd];
      if (prev == kNegInf) continue;
      logw[dd - 1] = prev + log_poisson_duration(dd, duration_rates[letter]) +
                     fll.range_sum(letter, t + m - dd, t + m);
    }
    int dd = 1 + rng.categorical_log(logw.data(), d_hi);
    durations[k - 1] = dd;
    m -= dd;
  }
  return durations;
}

}  // namespace proseg
