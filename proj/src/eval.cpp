#include "proseg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace proseg {

double adjusted_rand_index(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("adjusted_rand_index: length mismatch");
  if (truth.empty()) throw std::invalid_argument("adjusted_rand_index: empty labelings");

  auto compact = [](const std::vector<int>& labels) {
    std::unordered_map<int, int> index;
    std::vector<int> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
      auto [it, inserted] = index.try_emplace(labels[i], static_cast<int>(index.size()));
      out[i] = it->second;
    }
    return std::pair{out, static_cast<int>(index.size())};
  };
  auto [a, ka] = compact(truth);
  auto [b, kb] = compact(predicted);

  std::vector<double> contingency(static_cast<size_t>(ka) * kb, 0.0);
  std::vector<double> row(ka, 0.0), col(kb, 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    contingency[static_cast<size_t>(a[i]) * kb + b[i]] += 1.0;
    row[a[i]] += 1.0;
    col[b[i]] += 1.0;
  }

  auto choose2 = [](double n) { return n * (n - 1.0) / 2.0; };
  double sum_cells = 0.0;
  for (double c : contingency) sum_cells += choose2(c);
  double sum_rows = 0.0, sum_cols = 0.0;
  for (double r : row) sum_rows += choose2(r);
  for (double c : col) sum_cols += choose2(c);
  double pairs = choose2(static_cast<double>(a.size()));

  double expected = sum_rows * sum_cols / pairs;
  double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both labelings trivial
  return (sum_cells - expected) / (max_index - expected);
}

BoundaryPRF boundary_prf(const std::vector<int>& truth_boundaries,
                         const std::vector<int>& predicted_boundaries, int tolerance) {
  if (tolerance < 0) throw std::invalid_argument("boundary_prf: negative tolerance");
  std::vector<int> truth = truth_boundaries;
  std::vector<int> pred = predicted_boundaries;
  std::sort(truth.begin(), truth.end());
  std::sort(pred.begin(), pred.end());

  size_t ti = 0;
  int matched = 0;
  for (int p : pred) {
    while (ti < truth.size() && truth[ti] < p - tolerance) ++ti;
    if (ti < truth.size() && truth[ti] <= p + tolerance) {
      ++matched;
      ++ti;
    }
  }

  BoundaryPRF out;
  if (!pred.empty()) out.precision = static_cast<double>(matched) / pred.size();
  if (!truth.empty()) out.recall = static_cast<double>(matched) / truth.size();
  if (out.precision + out.recall > 0)
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / xs.size();
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / (xs.size() - 1));
}

namespace {

// Lentz continued fraction for the regularized incomplete beta.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (dof <= 0) throw std::invalid_argument("student_t_cdf: dof must be positive");
  double x = dof / (dof + t * t);
  double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0 ? 1.0 - tail : tail;
}

TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test: need at least two samples per group");
  double ma = mean(a), mb = mean(b);
  double va = sample_stddev(a), vb = sample_stddev(b);
  va *= va;
  vb *= vb;
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double se2 = va / na + vb / nb;

  TTestResult r;
  if (se2 == 0.0) {
    // identical (or both constant) samples: no evidence of difference
    r.t = 0.0;
    r.dof = na + nb - 2.0;
    r.p_two_sided = ma == mb ? 1.0 : 0.0;
    r.p_one_sided_greater = ma > mb ? 0.0 : (ma == mb ? 0.5 : 1.0);
    if (ma == mb) r.p_two_sided = 1.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 /
          (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  double cdf = student_t_cdf(r.t, r.dof);
  r.p_one_sided_greater = 1.0 - cdf;
  r.p_two_sided = 2.0 * std::min(cdf, 1.0 - cdf);
  return r;
}

}  // namespace proseg
