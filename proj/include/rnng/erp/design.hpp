#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rnng/erp/epochs.hpp"

namespace rnng::erp {

inline constexpr const char* kIntercept = "(intercept)";

/// Intercept first, then mean-centered controls, then the centered target (if any).
struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;       // rows = epochs
  std::vector<double> means;    // subtracted from each column (0 for the intercept)
  std::optional<std::string> target;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  std::size_t index_of(const std::string& name) const;
  DesignMatrix select_rows(const std::vector<std::size_t>& rows) const;
};

/// Builds intercept + controls + target. An empty target gives the
/// controls-only baseline. Missing, duplicate or constant columns are errors.
DesignMatrix build_design(const EpochMetadata& meta, const std::optional<std::string>& target,
                          const std::vector<std::string>& controls);

/// Deterministic Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation_indices(std::size_t n, std::uint64_t seed);

/// Rows permuted jointly across every column.
DesignMatrix permute_design(const DesignMatrix& d, std::uint64_t seed);

/// Independent seed for stream `index` of a run seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t salt = 0);

}  // namespace rnng::erp
