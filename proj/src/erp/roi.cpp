#include "rnng/erp/roi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "rnng/erp/regress.hpp"
#include "rnng/erp/stats.hpp"

namespace rnng::erp {

const std::vector<Region>& roi_presets() {
  static const std::vector<Region> presets = {
      {"N400",
       {"C3", "C1", "Cz", "C2", "C4", "CP3", "CP1", "CPz", "CP2", "CP4", "P3", "P1", "Pz", "P2", "P4"},
       0.3,
       0.5},
      {"P600",
       {"P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8", "PO7", "PO3", "POz", "PO4", "PO8", "O1", "Oz", "O2"},
       0.6,
       0.7},
      {"ANT",
       {"Fp1", "Fpz", "Fp2", "AF7", "AF3", "AFz", "AF4", "AF8", "F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8"},
       0.2,
       0.4},
  };
  return presets;
}

const Region& roi_preset(const std::string& name) {
  for (const auto& r : roi_presets()) {
    if (r.name == name) return r;
  }
  throw std::invalid_argument("unknown region '" + name + "' (expected N400, P600 or ANT)");
}

std::vector<double> roi_average(const EpochSet& e, const Region& region) {
  std::vector<std::size_t> chans;
  for (const auto& name : region.channels) {
    if (auto idx = e.channel_index(name)) chans.push_back(*idx);
  }
  const auto [t0, t1] = e.sample_range(region.t_from, region.t_to);
  if (chans.empty() || t0 >= t1) {
    throw std::invalid_argument("region " + region.name + " selects no " + (chans.empty() ? "channels" : "samples"));
  }
  std::vector<double> out(e.n_epochs, 0.0);
  const double count = static_cast<double>(chans.size() * (t1 - t0));
  for (std::size_t ep = 0; ep < e.n_epochs; ++ep) {
    double s = 0.0;
    for (std::size_t c : chans) {
      for (std::size_t t = t0; t < t1; ++t) s += e.at(ep, c, t);
    }
    out[ep] = s / count;
  }
  return out;
}

namespace {

Eigen::MatrixXd with_subjects(const DesignMatrix& d, const std::vector<std::string>& subjects) {
  std::map<std::string, std::size_t> ids;
  for (const auto& s : subjects) ids.emplace(s, 0);
  std::size_t k = 0;
  for (auto& [name, id] : ids) id = k++;
  const Eigen::Index extra = static_cast<Eigen::Index>(ids.size()) - 1;  // first subject absorbed by the intercept
  Eigen::MatrixXd x(d.values.rows(), d.values.cols() + extra);
  x.leftCols(d.values.cols()) = d.values;
  x.rightCols(extra).setZero();
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const std::size_t id = ids[subjects[i]];
    if (id > 0) x(static_cast<Eigen::Index>(i), d.values.cols() + static_cast<Eigen::Index>(id) - 1) = 1.0;
  }
  return x;
}

}  // namespace

double rss_with_subjects(std::span<const double> y, const DesignMatrix& d, const std::vector<std::string>& subjects) {
  if (y.size() != d.rows() || subjects.size() != d.rows()) {
    throw std::invalid_argument("response, design and subject lengths differ");
  }
  const Eigen::MatrixXd x = with_subjects(d, subjects);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) {
    DesignMatrix probe = d;
    probe.values = x;
    for (Eigen::Index j = d.values.cols(); j < x.cols(); ++j) probe.names.push_back("subject#" + std::to_string(j - d.values.cols() + 1));
    check_rank(probe);
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXd r = yv - x * qr.solve(yv);
  return r.squaredNorm();
}

LrtResult lrt_compare(std::span<const double> y, const DesignMatrix& d0, const DesignMatrix& d1,
                      const std::vector<std::string>& subjects) {
  const std::set<std::string> c0(d0.names.begin(), d0.names.end());
  const std::set<std::string> c1(d1.names.begin(), d1.names.end());
  if (c0 == c1) throw std::invalid_argument("lrt_compare: designs are identical");
  if (!std::includes(c1.begin(), c1.end(), c0.begin(), c0.end())) {
    throw std::invalid_argument("lrt_compare: designs are not nested");
  }
  LrtResult r;
  r.n = y.size();
  r.df = c1.size() - c0.size();
  const double rss0 = rss_with_subjects(y, d0, subjects);
  const double rss1 = rss_with_subjects(y, d1, subjects);
  r.chi2 = std::max(0.0, static_cast<double>(r.n) * std::log(rss0 / rss1));
  r.p = chi2_sf(r.chi2, static_cast<double>(r.df));
  return r;
}

}  // namespace rnng::erp
