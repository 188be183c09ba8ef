#pragma once

#include "proseg/model_core.hpp"
#include "proseg/rng.hpp"

namespace proseg {

struct SufficientStatsGaussian {
  long n = 0;
  VectorXd sum;
  MatrixXd sum_outer;  // sum of x x^T

  static SufficientStatsGaussian zero(int dim);
  void add(const VectorXd& x);
};

struct SufficientStatsPoisson {
  long n = 0;
  long total = 0;

  void add(long d) {
    ++n;
    total += d;
  }
};

// Primitive draws (unit scale); exposed because datagen and gibbs reuse them.
double sample_gamma(double shape, RandomSource& rng);
int sample_poisson(double rate, RandomSource& rng);
int sample_poisson_positive(double rate, RandomSource& rng);  // conditioned on >= 1
double sample_normal(double mean, double sd, RandomSource& rng);
VectorXd sample_mvn(const Gaussian& g, RandomSource& rng);

VectorXd sample_dirichlet(const VectorXd& concentration, RandomSource& rng);

struct NIWPosterior {
  VectorXd mu_n;
  double kappa_n;
  MatrixXd psi_n;
  double nu_n;
};

// Standard conjugate update; with n = 0 returns the prior parameters exactly.
NIWPosterior niw_posterior(const NIWParams& prior, const SufficientStatsGaussian& stats);

// Draws covariance from the inverse-Wishart posterior, then the mean.
// Throws std::runtime_error when the posterior scale is not SPD.
Gaussian sample_niw_gaussian(const NIWParams& prior, const SufficientStatsGaussian& stats,
                             RandomSource& rng);

// One draw from Gamma(shape + total, rate + n).
double sample_gamma_poisson_rate(double shape, double rate,
                                 const SufficientStatsPoisson& stats, RandomSource& rng);

double log_poisson_pmf(int d, double rate);

// Poisson pmf restricted to d >= 1 and renormalized; durations never take 0.
double log_poisson_duration(int d, double rate);

// Restricted to d >= min_d (a word of L letters needs at least L frames).
double log_poisson_duration_min(int d, double rate, int min_d);

double log_gaussian(const VectorXd& x, const VectorXd& mean, const MatrixXd& cov);

// Precomputed Cholesky form for repeated density evaluation.
class GaussianEval {
 public:
  explicit GaussianEval(const Gaussian& g);
  double operator()(const VectorXd& x) const;

 private:
  VectorXd mean_;
  MatrixXd chol_lower_;
  double log_norm_;
};

// Chinese-restaurant table count: sum of Bernoulli(a / (a + h)), h = 0..n-1.
// Backs the weak-limit resampling of the base distributions.
int sample_table_count(long n, double a, RandomSource& rng);

}  // namespace proseg
