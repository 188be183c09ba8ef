#pragma once

#include <vector>

namespace proseg {

// Standard pair-counting adjusted Rand index; 1 for identical clusterings,
// around 0 for independent ones. Both labelings are over the same frames.
double adjusted_rand_index(const std::vector<int>& truth, const std::vector<int>& predicted);

struct BoundaryPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Greedy one-to-one matching of boundary frame indices within +-tolerance.
// Empty predicted against nonempty truth reports (0, 0, 0).
BoundaryPRF boundary_prf(const std::vector<int>& truth_boundaries,
                         const std::vector<int>& predicted_boundaries, int tolerance);

double mean(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);

// Regularized incomplete beta, used by the t distribution.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double dof);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p_two_sided = 1.0;
  double p_one_sided_greater = 0.5;  // H1: mean(a) > mean(b)
};

// Welch's unequal-variance t-test. Two identical samples give p = 1.
TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace proseg
