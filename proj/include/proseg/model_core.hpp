#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace proseg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Normal-inverse-Wishart prior for a Gaussian's (mean, covariance).
struct NIWParams {
  VectorXd mu0;
  double kappa0 = 1.0;
  MatrixXd sigma0;
  double nu0 = 0.0;  // must exceed dim - 1

  int dim() const { return static_cast<int>(mu0.size()); }
  static NIWParams isotropic(int dim, double mu, double kappa, double sigma_scale,
                             double nu);
};

struct Gaussian {
  VectorXd mean;
  MatrixXd cov;
  int dim() const { return static_cast<int>(mean.size()); }
};

struct Hyperparameters {
  double gamma_lm = 10.0;
  double alpha_lm = 10.0;
  double gamma_wm = 10.0;
  double alpha_wm = 10.0;
  double duration_shape = 200.0;  // Gamma prior on Poisson letter-duration rates
  double duration_rate = 10.0;
  NIWParams emission_niw;
  NIWParams prosody_niw_boundary;  // base measure of phi_1 (segment-final frames)
  NIWParams prosody_niw_interior;  // base measure of phi_0
  int max_letters = 10;
  int max_words = 10;
  int max_word_duration = 90;
  int max_word_length = 10;

  void check() const;  // throws std::invalid_argument on violated constraints
};

// Sampled global parameters of the two-level segment model.
struct ModelState {
  VectorXd beta_lm;   // word-level base distribution, also the initial-word law
  MatrixXd pi_lm;     // word bigram, rows are source words
  VectorXd beta_wm;   // letter-level base distribution
  MatrixXd pi_wm;     // letter bigram
  std::vector<std::vector<int>> words;  // dictionary entries, letter indices
  std::vector<Gaussian> emission_params;
  VectorXd duration_rates;  // per-letter Poisson rates, > 0
  Gaussian prosody_interior;  // phi_0; zero-dim when prosody is disabled
  Gaussian prosody_boundary;  // phi_1

  int n_words() const { return static_cast<int>(beta_lm.size()); }
  int n_letters() const { return static_cast<int>(beta_wm.size()); }
  int spectral_dim() const {
    return emission_params.empty() ? 0 : emission_params.front().dim();
  }
  int prosody_dim() const { return prosody_interior.dim(); }
  bool has_prosody() const { return prosody_dim() > 0; }
};

// One observed sequence: per-frame spectral features plus (optionally empty)
// prosody channels, same frame count.
struct ObservationSequence {
  MatrixXd spectral;  // T x D_y
  MatrixXd prosody;   // T x D_p, D_p may be 0
  std::string id;

  int frames() const { return static_cast<int>(spectral.rows()); }
  void check() const;
};

// Complete segmentation of one sequence: words, per-word durations, the
// letter alignment inside each word, and the derived boundary indicators.
struct Segmentation {
  std::vector<int> word_labels;               // z_s
  std::vector<int> word_durations;            // D_s, frames, sum = T
  std::vector<int> letter_labels;             // x_t, length T
  std::vector<std::vector<int>> letter_durations;  // D_sk, per word occurrence
  std::vector<uint8_t> boundary_flags;        // F_t, derived

  int frames() const;
  int n_segments() const { return static_cast<int>(word_labels.size()); }
};

// Ones exactly at the cumulative-duration positions (word-final frames).
// Throws if the durations do not sum to total_frames.
std::vector<uint8_t> derive_boundary_flags(const std::vector<int>& word_durations,
                                           int total_frames);

struct ValidationReport {
  struct Item {
    std::string check;
    bool ok;
    std::string detail;
  };
  std::vector<Item> items;

  bool ok() const;
  const Item* find(const std::string& check) const;
};

ValidationReport validate_state(const ModelState& state, const Hyperparameters& hp);

// FNV-1a over the dictionary contents; ties a likelihood cube to the
// dictionary it was built from.
uint64_t words_fingerprint(const std::vector<std::vector<int>>& words);

}  // namespace proseg
