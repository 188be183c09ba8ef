#pragma once

#include <map>
#include <string>

#include "proseg/datagen.hpp"
#include "proseg/model_core.hpp"
#include "proseg/prosody.hpp"

namespace proseg {

// Flat "key = value" file with '#' comments. Every key must be recognized;
// unknown keys are reported as errors so misconfigurations surface at once.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& path);
  static KeyValueFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  uint64_t get_uint64(const std::string& key, uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);

  // throws UsageError naming the first key nobody consumed
  void reject_unknown_keys() const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> consumed_;
};

struct RunConfig {
  // concentrations and duration prior
  double gamma_lm = 10.0, alpha_lm = 10.0, gamma_wm = 10.0, alpha_wm = 10.0;
  double duration_shape = 200.0, duration_rate = 10.0;
  // NIW scalars; nu0 = 0 means dimension + 2
  double emission_mu0 = 0.0, emission_kappa0 = 0.01, emission_sigma0 = 1.0,
         emission_nu0 = 0.0;
  double prosody_boundary_mu0 = 1.0, prosody_boundary_kappa0 = 2.0,
         prosody_boundary_sigma0 = 1.0, prosody_boundary_nu0 = 0.0;
  double prosody_interior_mu0 = 0.0, prosody_interior_kappa0 = 100.0,
         prosody_interior_sigma0 = 1.0, prosody_interior_nu0 = 0.0;
  // truncations
  int max_letters = 10, max_words = 10, max_word_duration = 90, max_word_length = 10;
  int fresh_words = 1;
  // run control
  std::string prosody_mode = "both";  // none | pause | f0 | both
  int n_sweeps = 100, n_trials = 1, checkpoint_every = 10, workers = 0;
  uint64_t seed = 0;
  std::string data_dir, out_dir;
  ProsodyConfig prosody;  // feature-extraction parameters

  void check() const;
};

RunConfig parse_run_config(const std::string& path);
CorpusSpec parse_corpus_spec(const std::string& path);

// NIW priors need the data dimensions; nu0 defaults to dim + 2.
Hyperparameters materialize_hyperparameters(const RunConfig& cfg, int spectral_dim,
                                            int prosody_dim);

// Prosody channel columns selected by mode: none {}, f0 {0}, pause {1},
// both {0, 1}. Throws UsageError when the data lacks the channels.
std::vector<int> prosody_mode_channels(const std::string& mode, int available_dims);

}  // namespace proseg
