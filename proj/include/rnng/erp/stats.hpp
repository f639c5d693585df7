#pragma once

#include <span>

namespace rnng::erp {

/// |t| cutoff for a two-sided test at level p with df degrees of freedom.
double t_critical(double df, double p_two_sided);

/// Upper tail of the chi-square distribution.
double chi2_sf(double x, double df);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1).
KsResult ks_uniform(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace rnng::erp
