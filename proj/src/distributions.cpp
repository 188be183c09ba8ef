#include "proseg/distributions.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "proseg/numeric.hpp"

namespace proseg {

SufficientStatsGaussian SufficientStatsGaussian::zero(int dim) {
  SufficientStatsGaussian s;
  s.sum = VectorXd::Zero(dim);
  s.sum_outer = MatrixXd::Zero(dim, dim);
  return s;
}

void SufficientStatsGaussian::add(const VectorXd& x) {
  ++n;
  sum += x;
  sum_outer += x * x.transpose();
}

double sample_gamma(double shape, RandomSource& rng) {
  if (!(shape > 0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape < 1.0) {
    // boost trick: G(a) = G(a+1) * U^(1/a)
    double u;
    do {
      u = rng.uniform();
    } while (u <= 0.0);
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

int sample_poisson(double rate, RandomSource& rng) {
  if (rate < 0) throw std::invalid_argument("poisson rate must be nonnegative");
  if (rate == 0) return 0;
  // Knuth inversion for small rates; exact split for large ones.
  if (rate > 30.0) return sample_poisson(rate / 2, rng) + sample_poisson(rate / 2, rng);
  double limit = std::exp(-rate);
  double prod = rng.uniform();
  int k = 0;
  while (prod > limit) {
    prod *= rng.uniform();
    ++k;
  }
  return k;
}

int sample_poisson_positive(double rate, RandomSource& rng) {
  if (!(rate > 0)) throw std::invalid_argument("duration rate must be positive");
  if (rate < 1e-9) return 1;  // essentially all truncated mass sits at 1
  for (;;) {
    int d = sample_poisson(rate, rng);
    if (d >= 1) return d;
  }
}

double sample_normal(double mean, double sd, RandomSource& rng) {
  return mean + sd * rng.normal();
}

VectorXd sample_mvn(const Gaussian& g, RandomSource& rng) {
  Eigen::LLT<MatrixXd> llt(g.cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_mvn: covariance not SPD");
  VectorXd z(g.dim());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return g.mean + llt.matrixL() * z;
}

VectorXd sample_dirichlet(const VectorXd& concentration, RandomSource& rng) {
  int n = static_cast<int>(concentration.size());
  if (n < 1) throw std::invalid_argument("sample_dirichlet: empty concentration");
  for (int i = 0; i < n; ++i)
    if (!(concentration[i] > 0))
      throw std::invalid_argument("sample_dirichlet: nonpositive concentration");
  VectorXd out(n);
  for (;;) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      out[i] = sample_gamma(concentration[i], rng);
      total += out[i];
    }
    if (total > 0.0) {
      out /= total;
      return out;
    }
    // all gamma draws underflowed; retry
  }
}

NIWPosterior niw_posterior(const NIWParams& prior, const SufficientStatsGaussian& stats) {
  int dim = prior.dim();
  if (stats.n > 0 && stats.sum.size() != dim)
    throw std::invalid_argument("niw_posterior: dimension mismatch");
  NIWPosterior post;
  if (stats.n == 0) {
    post.mu_n = prior.mu0;
    post.kappa_n = prior.kappa0;
    post.psi_n = prior.sigma0;
    post.nu_n = prior.nu0;
    return post;
  }
  double n = static_cast<double>(stats.n);
  VectorXd mean = stats.sum / n;
  MatrixXd scatter = stats.sum_outer - n * mean * mean.transpose();
  post.kappa_n = prior.kappa0 + n;
  post.nu_n = prior.nu0 + n;
  post.mu_n = (prior.kappa0 * prior.mu0 + stats.sum) / post.kappa_n;
  VectorXd diff = mean - prior.mu0;
  post.psi_n = prior.sigma0 + scatter +
               (prior.kappa0 * n / post.kappa_n) * diff * diff.transpose();
  post.psi_n = 0.5 * (post.psi_n + post.psi_n.transpose());  // enforce symmetry
  return post;
}

namespace {

// Inverse-Wishart draw via the Bartlett decomposition of the Wishart on the
// inverse scale: if W ~ Wishart(nu, Psi^-1) then W^-1 ~ IW(nu, Psi).
MatrixXd sample_inverse_wishart(double nu, const MatrixXd& psi, RandomSource& rng) {
  int dim = static_cast<int>(psi.rows());
  Eigen::LLT<MatrixXd> llt(psi);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("inverse-Wishart scale not SPD (degenerate statistics)");
  MatrixXd a = MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    a(i, i) = std::sqrt(2.0 * sample_gamma(0.5 * (nu - i), rng));  // chi(nu - i)
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  // W = L_inv^T A A^T L_inv with L from Psi = L L^T gives Wishart(nu, Psi^-1);
  // invert through triangular solves to stay symmetric.
  MatrixXd lower = llt.matrixL();
  MatrixXd m = a.triangularView<Eigen::Lower>().solve(lower.transpose());
  MatrixXd w_inv = m.transpose() * m;  // = (A^-T L^T)^T (A^-T ... ) = IW draw
  return 0.5 * (w_inv + w_inv.transpose());
}

}  // namespace

Gaussian sample_niw_gaussian(const NIWParams& prior, const SufficientStatsGaussian& stats,
                             RandomSource& rng) {
  NIWPosterior post = niw_posterior(prior, stats);
  Gaussian g;
  g.cov = sample_inverse_wishart(post.nu_n, post.psi_n, rng);
  Gaussian mean_law{post.mu_n, g.cov / post.kappa_n};
  g.mean = sample_mvn(mean_law, rng);
  return g;
}

double sample_gamma_poisson_rate(double shape, double rate,
                                 const SufficientStatsPoisson& stats, RandomSource& rng) {
  if (!(shape > 0 && rate > 0))
    throw std::invalid_argument("gamma-poisson: nonpositive prior parameters");
  double post_shape = shape + static_cast<double>(stats.total);
  double post_rate = rate + static_cast<double>(stats.n);
  return sample_gamma(post_shape, rng) / post_rate;
}

double log_poisson_pmf(int d, double rate) {
  if (d < 0) return kNegInf;
  return d * std::log(rate) - rate - std::lgamma(d + 1.0);
}

double log_poisson_duration(int d, double rate) {
  if (!(rate > 0)) throw std::invalid_argument("duration rate must be positive");
  if (d < 1) throw std::invalid_argument("durations are at least one frame");
  // renormalize over d >= 1: divide by 1 - exp(-rate)
  return log_poisson_pmf(d, rate) - log1mexp(rate);
}

double log_poisson_duration_min(int d, double rate, int min_d) {
  if (!(rate > 0)) throw std::invalid_argument("duration rate must be positive");
  if (min_d < 1) min_d = 1;
  if (d < min_d) return kNegInf;
  if (min_d == 1) return log_poisson_duration(d, rate);
  // log P(X <= min_d - 1) by direct summation; min_d is small
  double log_cdf = kNegInf;
  for (int k = 0; k < min_d; ++k) log_cdf = log_add(log_cdf, log_poisson_pmf(k, rate));
  double log_tail = log_cdf >= 0.0 ? kNegInf : log1mexp(-log_cdf);
  if (log_tail == kNegInf)
    throw std::runtime_error("truncated Poisson: no mass at d >= min_d");
  return log_poisson_pmf(d, rate) - log_tail;
}

double log_gaussian(const VectorXd& x, const VectorXd& mean, const MatrixXd& cov) {
  if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size())
    throw std::invalid_argument("log_gaussian: dimension mismatch");
  return GaussianEval(Gaussian{mean, cov})(x);
}

GaussianEval::GaussianEval(const Gaussian& g) : mean_(g.mean) {
  Eigen::LLT<MatrixXd> llt(g.cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("log_gaussian: covariance not SPD");
  chol_lower_ = llt.matrixL();
  double log_det_half = 0.0;
  for (int i = 0; i < chol_lower_.rows(); ++i) log_det_half += std::log(chol_lower_(i, i));
  log_norm_ = -0.5 * g.dim() * std::log(2.0 * M_PI) - log_det_half;
}

double GaussianEval::operator()(const VectorXd& x) const {
  VectorXd z = chol_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
  return log_norm_ - 0.5 * z.squaredNorm();
}

int sample_table_count(long n, double a, RandomSource& rng) {
  if (n <= 0) return 0;
  if (!(a > 0)) return n > 0 ? 1 : 0;
  int tables = 0;
  for (long h = 0; h < n; ++h)
    if (rng.uniform() < a / (a + h)) ++tables;
  return tables;
}

}  // namespace proseg
