#include "proseg/datagen.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "proseg/distributions.hpp"

namespace proseg {

void CorpusSpec::check() const {
  auto require = [](bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
  };
  require(n_words > 0, "n_words must be positive");
  require(n_letters > 0, "n_letters must be positive");
  require(letters_per_word_min >= 1 && letters_per_word_max >= letters_per_word_min,
          "letters_per_word range invalid");
  require(n_sequences > 0, "n_sequences must be positive");
  require(words_per_sequence_min >= 1 &&
              words_per_sequence_max >= words_per_sequence_min,
          "words_per_sequence range invalid");
  require(zipf_alpha >= 0, "zipf_alpha must be nonnegative");
  require(emission_separation > 0, "emission_separation must be positive");
  require(mean_letter_duration > 0, "mean_letter_duration must be positive");
  require(spectral_dim > 0, "spectral_dim must be positive");
  require(prosody_boundary_mean.size() == prosody_interior_mean.size(),
          "prosody mean dimensions differ");
}

VectorXd zipf_weights(int n, double alpha) {
  if (n < 1) throw std::invalid_argument("zipf_weights: n must be positive");
  if (alpha < 0) throw std::invalid_argument("zipf_weights: alpha must be nonnegative");
  VectorXd w(n);
  for (int k = 0; k < n; ++k) w[k] = std::pow(static_cast<double>(k + 1), -alpha);
  return w / w.sum();
}

namespace {

// Random placement with a minimum pairwise distance; the box grows with the
// number of letters so the packing stays feasible.
std::vector<VectorXd> place_separated_means(int count, int dim, double separation,
                                            RandomSource& rng) {
  double box = separation * (std::ceil(std::pow(count, 1.0 / dim)) + 1.0);
  std::vector<VectorXd> means;
  int attempts = 0;
  const int max_attempts = 2000 * count;
  while (static_cast<int>(means.size()) < count) {
    if (++attempts > max_attempts)
      throw std::runtime_error(
          "could not place letter means at the requested separation; "
          "lower emission_separation or the letter count");
    VectorXd candidate(dim);
    for (int i = 0; i < dim; ++i) candidate[i] = rng.uniform(-box / 2, box / 2);
    bool ok = true;
    for (const auto& m : means)
      if ((m - candidate).norm() < separation) {
        ok = false;
        break;
      }
    if (ok) means.push_back(candidate);
  }
  return means;
}

}  // namespace

ModelState sample_model(const CorpusSpec& spec, RandomSource& rng) {
  spec.check();
  ModelState state;
  const int n = spec.n_words;
  const int k = spec.n_letters;

  VectorXd weights = zipf_weights(n, spec.zipf_alpha);
  state.beta_lm = weights;
  state.pi_lm.resize(n, n);
  for (int i = 0; i < n; ++i) state.pi_lm.row(i) = weights.transpose();
  state.beta_wm = VectorXd::Constant(k, 1.0 / k);
  state.pi_wm = MatrixXd::Constant(k, k, 1.0 / k);

  auto means = place_separated_means(k, spec.spectral_dim, spec.emission_separation, rng);
  state.emission_params.resize(k);
  for (int j = 0; j < k; ++j)
    state.emission_params[j] =
        Gaussian{means[j], MatrixXd::Identity(spec.spectral_dim, spec.spectral_dim)};
  state.duration_rates = VectorXd::Constant(k, spec.mean_letter_duration);

  // entries are distinct and avoid adjacent repeated letters (a repeat is
  // indistinguishable from a single longer letter)
  if (spec.letters_per_word_max > 1 && k < 2)
    throw std::invalid_argument("multi-letter words need at least two letters");
  std::set<std::vector<int>> seen;
  state.words.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000)
        throw std::runtime_error("could not draw distinct dictionary entries");
      int length = rng.uniform_int(spec.letters_per_word_min, spec.letters_per_word_max);
      std::vector<int> word(length);
      for (int p = 0; p < length; ++p) {
        word[p] = rng.uniform_int(0, k - 1);
        while (p > 0 && word[p] == word[p - 1]) word[p] = rng.uniform_int(0, k - 1);
      }
      if (seen.insert(word).second) {
        state.words[i] = word;
        break;
      }
    }
  }

  const int dp = static_cast<int>(spec.prosody_boundary_mean.size());
  if (dp > 0) {
    state.prosody_interior =
        Gaussian{spec.prosody_interior_mean, MatrixXd::Identity(dp, dp)};
    state.prosody_boundary =
        Gaussian{spec.prosody_boundary_mean, MatrixXd::Identity(dp, dp)};
  }
  return state;
}

GeneratedCorpus generate(const CorpusSpec& spec) {
  spec.check();
  RandomSource rng(derive_seed(spec.seed, 0x6765));
  GeneratedCorpus corpus;
  corpus.model = sample_model(spec, rng);
  const ModelState& model = corpus.model;
  const VectorXd weights = model.beta_lm;
  const int dp = model.prosody_dim();

  for (int i = 0; i < spec.n_sequences; ++i) {
    const int n_tokens =
        rng.uniform_int(spec.words_per_sequence_min, spec.words_per_sequence_max);
    GroundTruth truth;
    std::vector<VectorXd> spectral_rows;
    for (int s = 0; s < n_tokens; ++s) {
      const int word_id = rng.categorical(weights.data(), spec.n_words);
      const auto& word = model.words[word_id];
      int word_frames = 0;
      for (int letter : word) {
        const int d = sample_poisson_positive(model.duration_rates[letter], rng);
        word_frames += d;
        for (int u = 0; u < d; ++u) {
          spectral_rows.push_back(sample_mvn(model.emission_params[letter], rng));
          truth.letter_labels.push_back(letter);
          truth.word_labels.push_back(word_id);
        }
      }
      truth.word_ids.push_back(word_id);
      truth.word_durations.push_back(word_frames);
    }
    const int frames = static_cast<int>(spectral_rows.size());
    truth.boundary_flags = derive_boundary_flags(truth.word_durations, frames);

    ObservationSequence seq;
    seq.id = "gen" + std::to_string(i);
    seq.spectral.resize(frames, spec.spectral_dim);
    for (int t = 0; t < frames; ++t) seq.spectral.row(t) = spectral_rows[t].transpose();
    seq.prosody.resize(frames, dp);
    for (int t = 0; t < frames && dp > 0; ++t) {
      const Gaussian& phi =
          truth.boundary_flags[t] ? model.prosody_boundary : model.prosody_interior;
      seq.prosody.row(t) = sample_mvn(phi, rng).transpose();
    }
    corpus.sequences.push_back(std::move(seq));
    corpus.truths.push_back(std::move(truth));
  }
  return corpus;
}

}  // namespace proseg
