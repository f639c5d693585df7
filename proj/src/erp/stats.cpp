#include "rnng/erp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace rnng::erp {

double t_critical(double df, double p_two_sided) {
  boost::math::students_t dist(df);
  return boost::math::quantile(boost::math::complement(dist, p_two_sided / 2));
}

double chi2_sf(double x, double df) {
  if (x <= 0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

KsResult ks_uniform(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("ks_uniform: no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  KsResult r;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = std::clamp(v[i], 0.0, 1.0);
    r.d = std::max({r.d, (static_cast<double>(i) + 1) / n - x, x - static_cast<double>(i) / n});
  }
  // Kolmogorov tail with Stephens' finite-sample scaling.
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * r.d;
  if (lambda < 0.2) {
    r.p = 1.0;
    return r;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  r.p = std::clamp(sum, 0.0, 1.0);
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: need two equal-length series");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace rnng::erp
