#include "randquad/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace randquad::stats {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 16;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MeanStderr summarize(std::span<const double> values) {
  MeanStderr out;
  out.count = values.size();
  if (values.empty()) return out;
  const double shift = values.front();
  std::vector<double> d(values.size());
  std::vector<double> d2(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    d[i] = values[i] - shift;
    d2[i] = d[i] * d[i];
  }
  const double n = static_cast<double>(values.size());
  const double s = pairwise_sum(d);
  const double ss = pairwise_sum(d2);
  out.mean = shift + s / n;
  if (values.size() > 1) {
    const double var = std::max(0.0, (ss - s * s / n) / (n - 1.0));
    out.std_dev = std::sqrt(var);
    out.std_error = out.std_dev / std::sqrt(n);
  }
  return out;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("least_squares: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sse = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (x.size() > 2) fit.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double ks_uniform(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("ks_uniform: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = std::clamp(samples[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace randquad::stats
