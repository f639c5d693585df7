#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rnng/erp/design.hpp"
#include "rnng/erp/epochs.hpp"

namespace rnng::erp {

class RankDeficientError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// OLS coefficients for every (channel, timepoint).
struct PointwiseFit {
  std::size_t n_channels = 0;
  std::size_t n_times = 0;
  std::vector<std::string> names;
  Eigen::MatrixXd betas;  // predictors x (channel * n_times + time)
  /// max |x_j . r| / (|x_j| |r|) over columns and cells.
  double residual_orthogonality = 0.0;
  /// Mean lag-1 autocorrelation of residuals along time.
  double residual_ar1 = 0.0;

  double beta(std::size_t channel, std::size_t time, std::size_t predictor) const {
    return betas(static_cast<Eigen::Index>(predictor), static_cast<Eigen::Index>(channel * n_times + time));
  }
};

/// Throws RankDeficientError naming the collinear columns.
void check_rank(const DesignMatrix& d);

PointwiseFit fit_pointwise(const EpochSet& e, const DesignMatrix& d);

struct ClusterOptions {
  std::size_t n_perm = 1000;
  double threshold_p = 0.05;
  std::uint64_t seed = 1;
};

struct Cluster {
  std::vector<std::pair<std::size_t, std::size_t>> members;  // (channel, time)
  double mass = 0.0;  // summed t
  double p = 1.0;
  int polarity = 1;
};

struct ClusterTest {
  std::vector<Cluster> clusters;  // by |mass|, largest first
  std::vector<double> t_map;      // channel * n_times + time
  double t_threshold = 0.0;
  std::vector<double> null_max;   // largest |mass| per permutation
  std::size_t n_subjects = 0;
  std::size_t n_channels = 0;
  std::size_t n_times = 0;
};

/// Connected suprathreshold regions of `t_map` of one sign: neighbours are
/// adjacent timepoints on a channel and adjacent channels at a timepoint.
std::vector<Cluster> find_clusters(const std::vector<double>& t_map, std::size_t n_channels, std::size_t n_times,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& adjacency,
                                   double threshold);

/// Per-subject OLS of the design's target, one-sample t over subjects at each
/// cell, clusters at |t| above the two-sided threshold, and a null built by
/// permuting each subject's design rows. p = (1 + #{null max >= |mass|}) / (1 + n_perm).
ClusterTest cluster_permutation_test(const EpochSet& e, const DesignMatrix& d, const ClusterOptions& options);

/// Row indices of each subject, in order of first appearance.
std::vector<std::pair<std::string, std::vector<std::size_t>>> subject_rows(const EpochMetadata& meta);

}  // namespace rnng::erp
