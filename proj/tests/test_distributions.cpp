#include <doctest.h>

#include <cmath>

#include "proseg/distributions.hpp"
#include "proseg/numeric.hpp"

using namespace proseg;

namespace {

// independent density oracle: explicit inverse and determinant, no Cholesky
double naive_log_gaussian(const VectorXd& x, const VectorXd& mean, const MatrixXd& cov) {
  const int dim = static_cast<int>(x.size());
  MatrixXd inv = cov.inverse();
  double det = cov.determinant();
  VectorXd diff = x - mean;
  return -0.5 * (dim * std::log(2.0 * M_PI) + std::log(det) +
                 diff.dot(inv * diff));
}

}  // namespace

TEST_SUITE("distributions") {

TEST_CASE("dirichlet concentrates at its mean for huge concentrations") {
  RandomSource rng(7);
  VectorXd conc(2);
  conc << 1e9, 1e9;
  VectorXd draw = sample_dirichlet(conc, rng);
  CHECK(draw[0] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(draw.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dirichlet with the language-model concentration is a simplex point") {
  RandomSource rng(11);
  double gamma = 10.0;
  VectorXd conc = VectorXd::Constant(2, gamma / 2);
  VectorXd draw = sample_dirichlet(conc, rng);
  CHECK(draw.minCoeff() >= 0.0);
  CHECK(std::abs(draw.sum() - 1.0) <= 1e-12);
}

TEST_CASE("dirichlet Monte-Carlo mean matches the analytic mean") {
  RandomSource rng(13);
  VectorXd conc(3);
  conc << 2, 1, 1;
  VectorXd acc = VectorXd::Zero(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += sample_dirichlet(conc, rng);
  acc /= n;
  CHECK(acc[0] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(acc[1] == doctest::Approx(0.25).epsilon(0.04));
  CHECK(acc[2] == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("dirichlet rejects nonpositive concentrations") {
  RandomSource rng(1);
  VectorXd conc(2);
  conc << 1.0, 0.0;
  CHECK_THROWS_AS(sample_dirichlet(conc, rng), std::invalid_argument);
}

TEST_CASE("NIW posterior with no data is the prior, exactly") {
  NIWParams prior = NIWParams::isotropic(3, 0.5, 0.01, 2.0, 5.0);
  auto post = niw_posterior(prior, SufficientStatsGaussian::zero(3));
  CHECK(post.mu_n == prior.mu0);
  CHECK(post.kappa_n == prior.kappa0);
  CHECK(post.psi_n == prior.sigma0);
  CHECK(post.nu_n == prior.nu0);
}

TEST_CASE("NIW posterior parameters match the hand computation exactly") {
  // two observations in 2 dims: (1, 0) and (3, 2)
  NIWParams prior = NIWParams::isotropic(2, 0.0, 2.0, 1.0, 4.0);
  SufficientStatsGaussian stats = SufficientStatsGaussian::zero(2);
  VectorXd x1(2), x2(2);
  x1 << 1, 0;
  x2 << 3, 2;
  stats.add(x1);
  stats.add(x2);

  auto post = niw_posterior(prior, stats);
  CHECK(post.kappa_n == 4.0);
  CHECK(post.nu_n == 6.0);
  // mu_n = (kappa0*mu0 + sum) / kappa_n = (0 + (4,2)) / 4
  CHECK(post.mu_n[0] == 1.0);
  CHECK(post.mu_n[1] == 0.5);
  // scatter = sum_outer - n xbar xbar^T; xbar = (2,1)
  // sum_outer = [[10,6],[6,4]]; scatter = [[2,2],[2,2]]
  // psi = I + scatter + (kappa0 n / kappa_n)(xbar - mu0)(..)^T = I + scatter + 1*[[4,2],[2,1]]
  CHECK(post.psi_n(0, 0) == 7.0);
  CHECK(post.psi_n(0, 1) == 4.0);
  CHECK(post.psi_n(1, 0) == 4.0);
  CHECK(post.psi_n(1, 1) == 4.0);
}

TEST_CASE("NIW posterior concentrates on the sample mean") {
  const int dim = 3;
  NIWParams prior = NIWParams::isotropic(dim, 0.0, 0.01, 1.0, dim + 2);
  VectorXd target(dim);
  target << -1.0, 2.0, 0.5;
  RandomSource rng(17);
  SufficientStatsGaussian stats = SufficientStatsGaussian::zero(dim);
  Gaussian source{target, MatrixXd::Identity(dim, dim)};
  for (int i = 0; i < 10000; ++i) stats.add(sample_mvn(source, rng));
  Gaussian draw = sample_niw_gaussian(prior, stats, rng);
  for (int d = 0; d < dim; ++d) CHECK(std::abs(draw.mean[d] - target[d]) < 0.05);
  Eigen::LLT<MatrixXd> llt(draw.cov);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("boundary-prosody prior draws center near its prior mean") {
  const int dim = 2;
  NIWParams prior = NIWParams::isotropic(dim, 1.0, 2.0, 1.0, dim + 2);
  RandomSource rng(23);
  VectorXd acc = VectorXd::Zero(dim);
  const int n = 4000;
  for (int i = 0; i < n; ++i)
    acc += sample_niw_gaussian(prior, SufficientStatsGaussian::zero(dim), rng).mean;
  acc /= n;
  CHECK(acc[0] == doctest::Approx(1.0).epsilon(0.1));
  CHECK(acc[1] == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("gamma-poisson prior mean is shape/rate") {
  RandomSource rng(29);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += sample_gamma_poisson_rate(200.0, 10.0, {}, rng);
  CHECK(acc / n == doctest::Approx(20.0).epsilon(0.005));
}

TEST_CASE("gamma-poisson posterior means match the analytic values") {
  RandomSource rng(31);
  SufficientStatsPoisson stats;
  stats.n = 100;
  stats.total = 1500;
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += sample_gamma_poisson_rate(200.0, 10.0, stats, rng);
  CHECK(acc / n == doctest::Approx(1700.0 / 110.0).epsilon(0.006));

  SufficientStatsPoisson one;
  one.add(1);
  acc = 0.0;
  for (int i = 0; i < n; ++i) acc += sample_gamma_poisson_rate(200.0, 10.0, one, rng);
  CHECK(acc / n == doctest::Approx(201.0 / 11.0).epsilon(0.006));
}

TEST_CASE("duration pmf pushes all mass to 1 as the rate vanishes") {
  CHECK(std::abs(log_poisson_duration(1, 1e-12)) < 1e-9);
}

TEST_CASE("duration pmf at d=20, rate 20 equals the renormalized Poisson value") {
  double direct = 20 * std::log(20.0) - 20.0 - std::lgamma(21.0) -
                  std::log(1.0 - std::exp(-20.0));
  CHECK(log_poisson_duration(20, 20.0) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("duration pmf normalizes over d >= 1") {
  double total = 0.0;
  for (int d = 1; d <= 500; ++d) total += std::exp(log_poisson_duration(d, 20.0));
  CHECK(std::abs(total - 1.0) < 1e-10);
}

TEST_CASE("duration pmf rejects d = 0") {
  CHECK_THROWS_AS(log_poisson_duration(0, 5.0), std::invalid_argument);
}

TEST_CASE("min-truncated duration pmf normalizes over d >= min_d") {
  double total = 0.0;
  for (int d = 3; d <= 600; ++d) total += std::exp(log_poisson_duration_min(d, 12.0, 3));
  CHECK(std::abs(total - 1.0) < 1e-10);
  CHECK(log_poisson_duration_min(2, 12.0, 3) == kNegInf);
}

TEST_CASE("standard normal log density at the mode") {
  VectorXd x = VectorXd::Zero(1), mean = VectorXd::Zero(1);
  MatrixXd cov = MatrixXd::Identity(1, 1);
  CHECK(log_gaussian(x, mean, cov) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
}

TEST_CASE("bivariate log density at the mean drops the quadratic term") {
  VectorXd mean(2);
  mean << 1.0, -2.0;
  MatrixXd cov(2, 2);
  cov << 2.0, 0.3, 0.3, 1.0;
  double expected = -std::log(2.0 * M_PI) - 0.5 * std::log(cov.determinant());
  CHECK(log_gaussian(mean, mean, cov) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log density agrees with an independent naive implementation") {
  RandomSource rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    int dim = rng.uniform_int(1, 3);
    VectorXd x(dim), mean(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = rng.uniform(-3, 3);
      mean[i] = rng.uniform(-3, 3);
    }
    MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = rng.uniform(-1, 1);
    MatrixXd cov = a * a.transpose() + 0.5 * MatrixXd::Identity(dim, dim);
    CHECK(log_gaussian(x, mean, cov) ==
          doctest::Approx(naive_log_gaussian(x, mean, cov)).epsilon(1e-10));
  }
}

TEST_CASE("non-SPD covariance is rejected") {
  VectorXd x = VectorXd::Zero(2);
  MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS(log_gaussian(x, x, bad));
}

TEST_CASE("samplers are deterministic under a fixed seed") {
  RandomSource a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_gamma(2.5, a) == sample_gamma(2.5, b));
    CHECK(sample_poisson(40.0, a) == sample_poisson(40.0, b));
    CHECK(a.normal() == b.normal());
  }
}

TEST_CASE("poisson sampler moments survive the large-rate split") {
  RandomSource rng(41);
  double acc = 0.0, acc2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    double v = sample_poisson(50.0, rng);
    acc += v;
    acc2 += v * v;
  }
  double m = acc / n;
  CHECK(m == doctest::Approx(50.0).epsilon(0.01));
  CHECK(acc2 / n - m * m == doctest::Approx(50.0).epsilon(0.05));
}

TEST_CASE("positive poisson never returns zero") {
  RandomSource rng(43);
  for (int i = 0; i < 2000; ++i) CHECK(sample_poisson_positive(0.05, rng) >= 1);
}

TEST_CASE("table counts hit both extremes") {
  RandomSource rng(47);
  CHECK(sample_table_count(0, 1.0, rng) == 0);
  CHECK(sample_table_count(5, 1e12, rng) == 5);
  CHECK(sample_table_count(50, 1e-12, rng) == 1);
}

}  // TEST_SUITE
