#include "rnng/metrics/table.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rnng::metrics {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

void write_metrics(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.sent << '\t' << r.idx << '\t' << r.token << '\t' << r.distance << '\t' << format_double(r.surprisal)
        << '\t' << format_double(r.entropy) << '\t' << format_double(r.entropy_delta) << '\t' << (r.content ? 1 : 0)
        << '\t' << (r.exhausted ? 1 : 0) << '\n';
  }
}

void write_metrics(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_metrics(out, rows);
}

std::vector<MetricRow> read_metrics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw std::runtime_error("metrics table: bad header");
  std::vector<MetricRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 9) {
      throw std::runtime_error("metrics table line " + std::to_string(lineno) + ": expected 9 columns, got " +
                               std::to_string(f.size()));
    }
    try {
      MetricRow r;
      r.sent = std::stoul(f[0]);
      r.idx = std::stoul(f[1]);
      r.token = f[2];
      r.distance = std::stoul(f[3]);
      r.surprisal = parse_double(f[4]);
      r.entropy = parse_double(f[5]);
      r.entropy_delta = parse_double(f[6]);
      r.content = f[7] == "1";
      r.exhausted = f[8] == "1";
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error("metrics table line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<MetricRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_metrics(in);
}

}  // namespace rnng::metrics
