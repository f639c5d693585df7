#pragma once

#include <span>
#include <string>
#include <vector>

#include "rnng/erp/design.hpp"
#include "rnng/erp/epochs.hpp"

namespace rnng::erp {

struct Region {
  std::string name;
  std::vector<std::string> channels;
  double t_from = 0.0;
  double t_to = 0.0;
};

/// N400 (central-posterior, 300-500 ms), P600 (posterior, 600-700 ms) and ANT (anterior, 200-400 ms).
const std::vector<Region>& roi_presets();
const Region& roi_preset(const std::string& name);

/// Mean over the region's channels present in `e` and its window, per epoch.
std::vector<double> roi_average(const EpochSet& e, const Region& region);

struct LrtResult {
  double chi2 = 0.0;
  std::size_t df = 0;
  double p = 1.0;
  std::size_t n = 0;
};

/// Residual sum of squares of y on [design | subject dummies].
double rss_with_subjects(std::span<const double> y, const DesignMatrix& d, const std::vector<std::string>& subjects);

/// Nested comparison d0 within d1 with per-subject intercept columns added to
/// both: chi2 = n log(RSS0 / RSS1), df = extra columns in d1.
LrtResult lrt_compare(std::span<const double> y, const DesignMatrix& d0, const DesignMatrix& d1,
                      const std::vector<std::string>& subjects);

}  // namespace rnng::erp
