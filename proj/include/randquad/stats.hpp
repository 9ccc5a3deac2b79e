#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace randquad::stats {

// Fixed-shape pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

struct MeanStderr {
  double mean = 0.0;
  double std_dev = 0.0;    // sample standard deviation (N-1)
  double std_error = 0.0;  // std_dev / sqrt(N)
  std::size_t count = 0;
};

// Shifted two-pass moments: exact (zero spread) for constant input.
MeanStderr summarize(std::span<const double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

// One-sample Kolmogorov-Smirnov statistic against Uniform[0,1].
double ks_uniform(std::vector<double> samples);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace randquad::stats
