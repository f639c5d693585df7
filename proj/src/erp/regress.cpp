#include "rnng/erp/regress.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rnng::erp {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> data_matrix(const EpochSet& e) {
  return {e.data.data(), static_cast<Eigen::Index>(e.n_epochs),
          static_cast<Eigen::Index>(e.n_channels * e.n_times)};
}

}  // namespace

void check_rank(const DesignMatrix& d) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.values);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  if (rank == d.values.cols()) return;
  std::string cols;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = rank; i < d.values.cols(); ++i) {
    if (!cols.empty()) cols += ", ";
    cols += d.names[static_cast<std::size_t>(perm[i])];
  }
  throw RankDeficientError("rank-deficient design (rank " + std::to_string(rank) + " of " +
                           std::to_string(d.values.cols()) + "): " + cols + " collinear with the remaining columns");
}

PointwiseFit fit_pointwise(const EpochSet& e, const DesignMatrix& d) {
  if (d.rows() != e.n_epochs) {
    throw std::invalid_argument("design has " + std::to_string(d.rows()) + " rows but there are " +
                                std::to_string(e.n_epochs) + " epochs");
  }
  check_rank(d);
  const auto y = data_matrix(e);
  const Eigen::MatrixXd& x = d.values;
  Eigen::LDLT<Eigen::MatrixXd> normal(x.transpose() * x);

  PointwiseFit fit;
  fit.n_channels = e.n_channels;
  fit.n_times = e.n_times;
  fit.names = d.names;
  fit.betas = normal.solve(x.transpose() * y);

  const Eigen::Index cells = y.cols();
  const Eigen::VectorXd xnorm = x.colwise().norm();
  double ortho = 0.0, ar_sum = 0.0;
  std::size_t ar_count = 0;
  constexpr Eigen::Index kBlock = 512;
  for (Eigen::Index start = 0; start < cells; start += kBlock) {
    const Eigen::Index w = std::min(kBlock, cells - start);
    const Eigen::MatrixXd r = y.middleCols(start, w) - x * fit.betas.middleCols(start, w);
    const Eigen::MatrixXd dots = x.transpose() * r;
    const Eigen::RowVectorXd rnorm = r.colwise().norm();
    for (Eigen::Index j = 0; j < w; ++j) {
      if (rnorm(j) == 0) continue;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        ortho = std::max(ortho, std::abs(dots(k, j)) / (xnorm(k) * rnorm(j)));
      }
    }
    for (Eigen::Index j = 0; j + 1 < w; ++j) {
      const auto cell = static_cast<std::size_t>(start + j);
      if ((cell + 1) % e.n_times == 0) continue;
      const double num = r.col(j).dot(r.col(j + 1));
      const double den = rnorm(j) * rnorm(j + 1);
      if (den > 0) {
        ar_sum += num / den;
        ++ar_count;
      }
    }
  }
  fit.residual_orthogonality = ortho;
  fit.residual_ar1 = ar_count ? ar_sum / static_cast<double>(ar_count) : 0.0;
  return fit;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> subject_rows(const EpochMetadata& meta) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    auto [it, fresh] = index.emplace(meta.subject[i], out.size());
    if (fresh) out.push_back({meta.subject[i], {}});
    out[it->second].second.push_back(i);
  }
  return out;
}

std::vector<Cluster> find_clusters(const std::vector<double>& t_map, std::size_t n_channels, std::size_t n_times,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& adjacency,
                                   double threshold) {
  std::vector<std::vector<std::size_t>> neighbours(n_channels);
  for (const auto& [a, b] : adjacency) {
    if (a != b) neighbours[a].push_back(b);
  }
  std::vector<int> sign(t_map.size(), 0);
  for (std::size_t i = 0; i < t_map.size(); ++i) {
    if (t_map[i] > threshold) sign[i] = 1;
    else if (t_map[i] < -threshold) sign[i] = -1;
  }
  std::vector<bool> seen(t_map.size(), false);
  std::vector<Cluster> out;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < t_map.size(); ++start) {
    if (!sign[start] || seen[start]) continue;
    Cluster cl;
    cl.polarity = sign[start];
    seen[start] = true;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const std::size_t c = cur / n_times, t = cur % n_times;
      cl.members.emplace_back(c, t);
      cl.mass += t_map[cur];
      auto visit = [&](std::size_t nb) {
        if (!seen[nb] && sign[nb] == cl.polarity) {
          seen[nb] = true;
          stack.push_back(nb);
        }
      };
      if (t > 0) visit(cur - 1);
      if (t + 1 < n_times) visit(cur + 1);
      for (std::size_t nc : neighbours[c]) visit(nc * n_times + t);
    }
    std::sort(cl.members.begin(), cl.members.end());
    out.push_back(std::move(cl));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Cluster& a, const Cluster& b) { return std::abs(a.mass) > std::abs(b.mass); });
  return out;
}

}  // namespace rnng::erp
