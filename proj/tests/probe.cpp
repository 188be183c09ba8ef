#include <cstdio>
#include <cstdlib>
#include "helpers.hpp"
#include "proseg/datagen.hpp"
#include "proseg/gibbs.hpp"
using namespace proseg;

static double getenv_d(const char* k, double dflt) {
  const char* v = std::getenv(k);
  return v && *v ? std::atof(v) : dflt;
}

int main(int argc, char** argv) {
  // argv: dataseed trainseed ; everything else via env with defaults
  CorpusSpec spec;
  spec.n_words = 5;
  spec.n_letters = (int)getenv_d("NLETTERS", 5);
  spec.letters_per_word_min = (int)getenv_d("LWMIN", 3);
  spec.letters_per_word_max = (int)getenv_d("LWMAX", 4);
  spec.n_sequences = 10;
  spec.words_per_sequence_min = (int)getenv_d("WPSMIN", 3);
  spec.words_per_sequence_max = (int)getenv_d("WPSMAX", 3);
  spec.emission_separation = getenv_d("SEP", 5.0);
  spec.mean_letter_duration = getenv_d("MLD", 15.0);
  spec.spectral_dim = 3;
  spec.seed = std::strtoull(argv[1], nullptr, 10);
  spec.prosody_boundary_mean = VectorXd::Ones(2);
  spec.prosody_interior_mean = VectorXd::Zero(2);
  auto corpus = generate(spec);

  int prosody_dims = (int)getenv_d("PROS", 0);
  std::vector<ObservationSequence> data = corpus.sequences;
  for (auto& s : data) s.prosody.conservativeResize(s.frames(), prosody_dims);
  std::vector<FrameLabels> truth;
  for (auto& t : corpus.truths) truth.push_back({t.letter_labels, t.word_labels});

  Hyperparameters hp;
  hp.max_words = (int)getenv_d("MAXW", 10);
  hp.max_letters = (int)getenv_d("MAXL", 10);
  hp.max_word_duration = 90;
  hp.max_word_length = (int)getenv_d("CAP", 4);
  hp.duration_shape = getenv_d("DSHAPE", 200);
  hp.duration_rate = getenv_d("DRATE", 10);
  hp.emission_niw = NIWParams::isotropic(3, 0.0, getenv_d("KAPPA0", 0.01),
                                         getenv_d("SIGMA0", 1.0), 5);
  if (prosody_dims > 0) {
    hp.prosody_niw_boundary =
        NIWParams::isotropic(prosody_dims, 1.0, 2.0, 1.0, prosody_dims + 2);
    hp.prosody_niw_interior =
        NIWParams::isotropic(prosody_dims, 0.0, 100.0, 1.0, prosody_dims + 2);
  }
  GibbsOptions opts;
  opts.workers = 2;
  opts.fresh_words = (int)getenv_d("FRESH", 4);
  int sweeps = (int)getenv_d("SWEEPS", 100);
  TrainState ts = init(data, hp, std::strtoull(argv[2], nullptr, 10), opts);
  std::vector<double> letter_hist, word_hist;
  for (int s = 0; s < sweeps; ++s) {
    sweep(ts, data, hp, opts, &truth);
    letter_hist.push_back(ts.trace.back().letter_ari);
    word_hist.push_back(ts.trace.back().word_ari);
  }
  std::printf("data %s train %s: letter %.3f word %.3f | l@10 %.2f l@30 %.2f w@30 %.2f\n",
              argv[1], argv[2], ts.trace.back().letter_ari, ts.trace.back().word_ari,
              letter_hist[9], letter_hist[29], word_hist[29]);
  if (std::getenv("DUMP")) {
    TransitionCounts c = count_transitions(ts, hp);
    std::printf("true dict:");
    for (int i = 0; i < spec.n_words; ++i) {
      std::printf("  [%d]:", i);
      for (int l : corpus.model.words[i]) std::printf("%d", l);
    }
    std::printf("\nlearned:");
    for (int i = 0; i < hp.max_words; ++i) {
      if (c.word_occurrences[i] == 0) continue;
      std::printf("  [%d]x%ld:", i, c.word_occurrences[i]);
      for (int l : ts.model.words[i]) std::printf("%d", l);
    }
    std::printf("\n");
  }
  return 0;
}
