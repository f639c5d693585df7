#include "rnng/erp/design.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace rnng::erp {

std::size_t DesignMatrix::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("design has no column '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

DesignMatrix DesignMatrix::select_rows(const std::vector<std::size_t>& rows) const {
  DesignMatrix out = *this;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

DesignMatrix build_design(const EpochMetadata& meta, const std::optional<std::string>& target,
                          const std::vector<std::string>& controls) {
  std::vector<std::string> columns = controls;
  if (target) columns.push_back(*target);
  std::set<std::string> seen;
  std::vector<std::string> problems;
  for (const auto& c : columns) {
    if (!seen.insert(c).second) problems.push_back("column '" + c + "' requested twice");
    if (!meta.has(c)) problems.push_back("missing column '" + c + "'");
  }
  if (!problems.empty()) {
    std::string msg = "cannot build design:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }

  const std::size_t n = meta.size();
  DesignMatrix d;
  d.target = target;
  d.names.push_back(kIntercept);
  for (const auto& c : columns) d.names.push_back(c);
  d.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d.names.size()));
  d.values.col(0).setOnes();
  d.means.push_back(0.0);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto& col = meta.column(columns[j]);
    const Eigen::Index k = static_cast<Eigen::Index>(j + 1);
    for (std::size_t i = 0; i < n; ++i) d.values(static_cast<Eigen::Index>(i), k) = col[i];
    const double mean = d.values.col(k).mean();
    d.values.col(k).array() -= mean;
    d.values.col(k).array() -= d.values.col(k).mean();
    d.means.push_back(mean);
    if (d.values.col(k).cwiseAbs().maxCoeff() < 1e-12) {
      throw std::invalid_argument("cannot build design: column '" + columns[j] + "' is constant");
    }
  }
  return d;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1) + 0xbf58476d1ce4e5b9ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> permutation_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> d(0, i - 1);
    std::swap(p[i - 1], p[d(rng)]);
  }
  return p;
}

DesignMatrix permute_design(const DesignMatrix& d, std::uint64_t seed) {
  return d.select_rows(permutation_indices(d.rows(), seed));
}

}  // namespace rnng::erp
