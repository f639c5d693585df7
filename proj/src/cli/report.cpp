#include "rnng/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

#include "rnng/metrics/table.hpp"

namespace rnng::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kExpected = {"loss.tsv",       "lm_loss.tsv", "parse_summary.txt", "metrics.tsv",
                                            "sweep.tsv",      "f1_summary.txt", "clusters.tsv",    "lrt.tsv",
                                            "gradcheck.tsv", "synth_spec.cfg"};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("column " + name + " missing");
    return static_cast<std::size_t>(it - header.begin());
  }
};

Table read_table(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  Table t;
  std::string line;
  if (std::getline(in, line)) t.header = metrics::split_tabs(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(metrics::split_tabs(line));
  }
  return t;
}

std::vector<std::pair<std::string, std::string>> read_pairs(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void loss_section(std::ostream& out, const fs::path& p, const std::string& title, const std::string& ppl_col) {
  const Table t = read_table(p);
  if (t.rows.empty()) {
    out << title << ": no epochs recorded\n\n";
    return;
  }
  const std::size_t c = t.col(ppl_col), l = t.col("train_loss");
  const double first = metrics::parse_double(t.rows.front()[c]);
  const double last = metrics::parse_double(t.rows.back()[c]);
  out << title << "\n";
  out << "  epochs            " << t.rows.back()[0] << "\n";
  out << "  final train loss  " << fixed(metrics::parse_double(t.rows.back()[l])) << "\n";
  out << "  " << ppl_col << (ppl_col.size() < 16 ? std::string(16 - ppl_col.size(), ' ') : " ") << "  "
      << fixed(first) << " -> " << fixed(last) << " (" << fixed(100.0 * (first - last) / first, 1) << "% lower)\n\n";
}

void metrics_section(std::ostream& out, const fs::path& p, const std::string& indent) {
  const auto rows = metrics::read_metrics(p);
  std::size_t exhausted = 0, content = 0;
  std::map<std::string, std::vector<double>> cols;
  for (const auto& r : rows) {
    if (r.exhausted) {
      ++exhausted;
      continue;
    }
    content += r.content;
    cols["distance"].push_back(static_cast<double>(r.distance));
    cols["surprisal"].push_back(r.surprisal);
    cols["entropy"].push_back(r.entropy);
    cols["entropy_delta"].push_back(r.entropy_delta);
  }
  out << indent << p.filename().string() << ": " << rows.size() << " words, " << content << " content, " << exhausted
      << " exhausted\n";
  if (rows.size() == exhausted) return;
  out << indent << "  " << std::left << std::setw(14) << "metric" << std::right << std::setw(10) << "mean"
      << std::setw(10) << "sd" << std::setw(10) << "min" << std::setw(10) << "median" << std::setw(10) << "max"
      << "\n";
  for (const std::string name : {"distance", "surprisal", "entropy", "entropy_delta"}) {
    auto v = cols[name];
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x / n;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    const double median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    out << indent << "  " << std::left << std::setw(14) << name << std::right << std::setw(10) << fixed(mean, 3)
        << std::setw(10) << fixed(sd, 3) << std::setw(10) << fixed(v.front(), 3) << std::setw(10) << fixed(median, 3)
        << std::setw(10) << fixed(v.back(), 3) << "\n";
  }
}

}  // namespace

std::string pipeline_report(const fs::path& dir) {
  std::vector<std::string> present;
  if (fs::is_directory(dir)) {
    for (const auto& name : kExpected) {
      if (fs::exists(dir / name)) present.push_back(name);
    }
  }
  if (present.empty()) {
    std::string msg = "no run artifacts in " + dir.string() + "; expected one of:";
    for (const auto& name : kExpected) msg += " " + name;
    throw MissingArtifactsError(msg);
  }
  auto has = [&](const std::string& name) { return std::find(present.begin(), present.end(), name) != present.end(); };

  std::ostringstream out;
  out << "Run report: " << dir.string() << "\n";
  if (fs::exists(dir / "resolved.cfg")) {
    std::ifstream in(dir / "resolved.cfg");
    std::string version, command;
    std::getline(in, version);
    std::getline(in, command);
    out << "  " << version.substr(version.find_first_not_of("# ")) << ", "
        << command.substr(command.find_first_not_of("# ")) << "\n";
  }
  out << "\n";

  if (has("loss.tsv")) loss_section(out, dir / "loss.tsv", "RNNG training", "dev_action_ppl");
  if (has("lm_loss.tsv")) loss_section(out, dir / "lm_loss.tsv", "LM training", "dev_lm_ppl");
  if (has("parse_summary.txt")) {
    out << "Parse\n";
    for (const auto& [k, v] : read_pairs(dir / "parse_summary.txt")) {
      out << "  " << std::left << std::setw(18) << k << v << "\n";
    }
    out << "\n";
  }
  if (has("metrics.tsv")) {
    out << "Metric distributions\n";
    metrics_section(out, dir / "metrics.tsv", "  ");
    out << "\n";
  }
  if (has("sweep.tsv")) {
    const Table t = read_table(dir / "sweep.tsv");
    out << "Beam sweep\n";
    for (const auto& row : t.rows) {
      out << "  == k = " << row[t.col("k")] << " ==\n";
      for (std::size_t c = 1; c < t.header.size() && c < row.size(); ++c) {
        out << "    " << std::left << std::setw(18) << t.header[c] << row[c] << "\n";
      }
      const fs::path m = dir / ("metrics_k" + row[t.col("k")] + ".tsv");
      if (fs::exists(m)) metrics_section(out, m, "    ");
    }
    out << "\n";
  }
  if (has("f1_summary.txt")) {
    out << "Bracket scores\n";
    for (const auto& [k, v] : read_pairs(dir / "f1_summary.txt")) out << "  " << std::left << std::setw(18) << k << v << "\n";
    out << "\n";
  }
  if (has("clusters.tsv")) {
    const Table t = read_table(dir / "clusters.tsv");
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& row : t.rows) {
      auto& c = counts[{row[t.col("target")], row[t.col("k")]}];
      ++c.first;
      c.second += metrics::parse_double(row[t.col("p")]) < 0.05;
    }
    out << "Cluster tests\n";
    for (const auto& [key, c] : counts) {
      out << "  " << key.first << " (k=" << key.second << "): " << c.first << " clusters, " << c.second
          << " with p < 0.05\n";
    }
    out << "\n";
  }
  if (has("lrt.tsv")) {
    const Table t = read_table(dir / "lrt.tsv");
    out << "ROI likelihood-ratio tests\n";
    for (const auto& row : t.rows) {
      out << "  " << row[t.col("target")] << " (k=" << row[t.col("k")] << ", " << row[t.col("roi")]
          << "): chi2 = " << fixed(metrics::parse_double(row[t.col("chi2")]), 3) << ", df = " << row[t.col("df")]
          << ", p = " << row[t.col("p")] << "\n";
    }
    out << "\n";
  }
  if (has("gradcheck.tsv")) {
    const Table t = read_table(dir / "gradcheck.tsv");
    std::map<std::string, double> worst;
    for (const auto& row : t.rows) {
      double& w = worst[row[t.col("check")]];
      w = std::max(w, metrics::parse_double(row[t.col("max_relative_error")]));
    }
    out << "Gradient checks\n";
    for (const auto& [name, w] : worst) out << "  " << std::left << std::setw(16) << name << w << "\n";
    out << "\n";
  }
  if (has("synth_spec.cfg")) out << "Synthetic epochs: specification in synth_spec.cfg\n\n";
  return out.str();
}

}  // namespace rnng::cli
