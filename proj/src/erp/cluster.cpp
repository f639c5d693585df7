#include <algorithm>
#include <cmath>

#include "rnng/erp/regress.hpp"
#include "rnng/erp/stats.hpp"

namespace rnng::erp {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

ClusterTest cluster_permutation_test(const EpochSet& e, const DesignMatrix& d, const ClusterOptions& options) {
  if (options.n_perm < 100) throw std::invalid_argument("cluster test needs at least 100 permutations");
  if (!d.target) throw std::invalid_argument("cluster test needs a design with a target column");
  if (d.rows() != e.n_epochs) throw std::invalid_argument("design rows do not match epochs");
  if (!(options.threshold_p > 0 && options.threshold_p < 1)) throw std::invalid_argument("threshold p must be in (0, 1)");
  const std::size_t target = d.index_of(*d.target);
  const auto subjects = subject_rows(e.meta);
  if (subjects.size() < 2) throw std::invalid_argument("cluster test needs at least two subjects");

  const std::size_t cells = e.n_channels * e.n_times;
  const std::size_t runs = options.n_perm + 1;  // row 0 is the observed design
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(runs), static_cast<Eigen::Index>(cells));
  Eigen::MatrixXd sumsq = sum;

  for (std::size_t s = 0; s < subjects.size(); ++s) {
    const auto& rows = subjects[s].second;
    const DesignMatrix xs = d.select_rows(rows);
    try {
      check_rank(xs);
    } catch (const RankDeficientError& err) {
      throw RankDeficientError("subject " + subjects[s].first + ": " + err.what());
    }
    // beta_target = w . y with w = X (X'X)^-1 e_target; permuting the design
    // rows by pi turns w into w[pi].
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(xs.values.cols());
    unit(static_cast<Eigen::Index>(target)) = 1.0;
    const Eigen::VectorXd w = xs.values * (xs.values.transpose() * xs.values).ldlt().solve(unit);

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(runs), n);
    weights.row(0) = w.transpose();
    for (std::size_t p = 1; p < runs; ++p) {
      const auto perm = permutation_indices(rows.size(), derive_seed(options.seed, p, s + 1));
      for (Eigen::Index i = 0; i < n; ++i) weights(static_cast<Eigen::Index>(p), i) = w(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
    }
    RowMajor y(n, static_cast<Eigen::Index>(cells));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double* src = e.data.data() + rows[static_cast<std::size_t>(i)] * cells;
      std::copy(src, src + cells, y.row(i).data());
    }
    const Eigen::MatrixXd betas = weights * y;
    sum += betas;
    sumsq += betas.cwiseProduct(betas);
  }

  const double n_subj = static_cast<double>(subjects.size());
  ClusterTest out;
  out.n_subjects = subjects.size();
  out.n_channels = e.n_channels;
  out.n_times = e.n_times;
  out.t_threshold = t_critical(n_subj - 1, options.threshold_p);

  auto t_row = [&](std::size_t run) {
    std::vector<double> t(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      const double m = sum(static_cast<Eigen::Index>(run), static_cast<Eigen::Index>(c)) / n_subj;
      const double var = (sumsq(static_cast<Eigen::Index>(run), static_cast<Eigen::Index>(c)) - n_subj * m * m) / (n_subj - 1);
      t[c] = var > 0 ? m / std::sqrt(var / n_subj) : 0.0;
    }
    return t;
  };

  out.t_map = t_row(0);
  out.clusters = find_clusters(out.t_map, e.n_channels, e.n_times, e.adjacency, out.t_threshold);
  out.null_max.reserve(options.n_perm);
  for (std::size_t p = 1; p < runs; ++p) {
    const auto null_clusters = find_clusters(t_row(p), e.n_channels, e.n_times, e.adjacency, out.t_threshold);
    out.null_max.push_back(null_clusters.empty() ? 0.0 : std::abs(null_clusters.front().mass));
  }
  for (auto& cl : out.clusters) {
    const double observed = std::abs(cl.mass);
    const auto exceed = std::count_if(out.null_max.begin(), out.null_max.end(), [&](double m) { return m >= observed; });
    cl.p = static_cast<double>(exceed + 1) / static_cast<double>(runs);
  }
  return out;
}

}  // namespace rnng::erp
