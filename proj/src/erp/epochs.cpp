#include "rnng/erp/epochs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace rnng::erp {

namespace {

constexpr char kMagic[8] = {'R', 'N', 'G', 'E', 'P', 'O', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::string& what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw EpochFormatError("truncated epoch file reading " + what);
  return v;
}

std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

const std::vector<double>& EpochMetadata::column(const std::string& name) const {
  auto it = numeric.find(name);
  if (it == numeric.end()) throw std::out_of_range("no metadata column '" + name + "'");
  return it->second;
}

void EpochMetadata::add_column(const std::string& name, std::vector<double> values) {
  if (values.size() != size()) throw std::invalid_argument("column '" + name + "' has the wrong length");
  if (!numeric.count(name)) numeric_names.push_back(name);
  numeric[name] = std::move(values);
}

EpochMetadata EpochMetadata::select(const std::vector<std::size_t>& rows) const {
  EpochMetadata out;
  out.numeric_names = numeric_names;
  for (std::size_t r : rows) {
    out.subject.push_back(subject.at(r));
    out.token.push_back(token.at(r));
    out.content.push_back(content.at(r));
  }
  for (const auto& [name, col] : numeric) {
    auto& dst = out.numeric[name];
    for (std::size_t r : rows) dst.push_back(col.at(r));
  }
  return out;
}

std::optional<std::size_t> EpochSet::channel_index(const std::string& name) const {
  auto it = std::find(channels.begin(), channels.end(), name);
  if (it == channels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - channels.begin());
}

std::pair<std::size_t, std::size_t> EpochSet::sample_range(double from, double to) const {
  const double slack = 0.5 / sample_rate;
  std::size_t lo = n_times, hi = 0;
  for (std::size_t t = 0; t < n_times; ++t) {
    const double s = time_of(t);
    if (s >= from - slack && s <= to + slack) {
      lo = std::min(lo, t);
      hi = std::max(hi, t + 1);
    }
  }
  if (lo >= hi) return {0, 0};
  return {lo, hi};
}

void EpochSet::validate() const {
  std::vector<std::string> problems;
  if (data.size() != n_epochs * n_channels * n_times) problems.push_back("data length does not match dimensions");
  if (channels.size() != n_channels) problems.push_back("channel name count does not match");
  if (meta.size() != n_epochs || meta.token.size() != n_epochs || meta.content.size() != n_epochs) {
    problems.push_back("metadata rows (" + std::to_string(meta.size()) + ") do not match epochs (" +
                       std::to_string(n_epochs) + ")");
  }
  for (const auto& [name, col] : meta.numeric) {
    if (col.size() != n_epochs) problems.push_back("metadata column '" + name + "' has the wrong length");
  }
  if (!(sample_rate > 0)) problems.push_back("sample rate must be positive");
  std::set<std::pair<std::size_t, std::size_t>> adj(adjacency.begin(), adjacency.end());
  for (const auto& [a, b] : adjacency) {
    if (a >= n_channels || b >= n_channels) problems.push_back("adjacency refers to a missing channel");
    else if (!adj.count({b, a})) problems.push_back("adjacency is not symmetric at " + channels[a] + "-" + channels[b]);
  }
  if (!problems.empty()) {
    std::string msg = "invalid epoch set:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw EpochFormatError(msg);
  }
}

EpochSet EpochSet::select(const std::vector<std::size_t>& epochs) const {
  EpochSet out = *this;
  out.n_epochs = epochs.size();
  out.data.clear();
  const std::size_t stride = n_channels * n_times;
  for (std::size_t e : epochs) out.data.insert(out.data.end(), data.begin() + e * stride, data.begin() + (e + 1) * stride);
  out.meta = meta.select(epochs);
  return out;
}

bool operator==(const EpochSet& a, const EpochSet& b) {
  return a.n_epochs == b.n_epochs && a.n_channels == b.n_channels && a.n_times == b.n_times &&
         a.sample_rate == b.sample_rate && a.t_start == b.t_start && a.channels == b.channels &&
         a.adjacency == b.adjacency && a.data == b.data && a.meta.subject == b.meta.subject &&
         a.meta.token == b.meta.token && a.meta.content == b.meta.content &&
         a.meta.numeric_names == b.meta.numeric_names && a.meta.numeric == b.meta.numeric;
}

void save_epochs(const std::filesystem::path& stem, const EpochSet& e) {
  e.validate();
  auto bin_path = stem;
  bin_path += ".bin";
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + bin_path.string());
  bin.write(kMagic, sizeof kMagic);
  put(bin, kVersion);
  put<std::uint64_t>(bin, e.n_epochs);
  put<std::uint64_t>(bin, e.n_channels);
  put<std::uint64_t>(bin, e.n_times);
  put(bin, e.sample_rate);
  put(bin, e.t_start);
  for (const auto& name : e.channels) {
    put<std::uint32_t>(bin, static_cast<std::uint32_t>(name.size()));
    bin.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  put<std::uint64_t>(bin, e.adjacency.size());
  for (const auto& [a, b] : e.adjacency) {
    put<std::uint32_t>(bin, static_cast<std::uint32_t>(a));
    put<std::uint32_t>(bin, static_cast<std::uint32_t>(b));
  }
  bin.write(reinterpret_cast<const char*>(e.data.data()), static_cast<std::streamsize>(e.data.size() * sizeof(double)));

  auto tsv_path = stem;
  tsv_path += ".tsv";
  std::ofstream tsv(tsv_path, std::ios::binary);
  if (!tsv) throw std::runtime_error("cannot write " + tsv_path.string());
  tsv << "subject\ttoken\tcontent";
  for (const auto& n : e.meta.numeric_names) tsv << '\t' << n;
  tsv << '\n';
  for (std::size_t i = 0; i < e.n_epochs; ++i) {
    tsv << e.meta.subject[i] << '\t' << e.meta.token[i] << '\t' << (e.meta.content[i] ? 1 : 0);
    for (const auto& n : e.meta.numeric_names) tsv << '\t' << number(e.meta.numeric.at(n)[i]);
    tsv << '\n';
  }
}

EpochSet load_epochs(const std::filesystem::path& stem) {
  auto bin_path = stem;
  bin_path += ".bin";
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw EpochFormatError("cannot read " + bin_path.string());
  char magic[8];
  if (!bin.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw EpochFormatError(bin_path.string() + ": not an epoch file");
  }
  const auto version = get<std::uint32_t>(bin, "version");
  if (version != kVersion) throw EpochFormatError(bin_path.string() + ": unsupported version " + std::to_string(version));
  EpochSet e;
  e.n_epochs = get<std::uint64_t>(bin, "epoch count");
  e.n_channels = get<std::uint64_t>(bin, "channel count");
  e.n_times = get<std::uint64_t>(bin, "timepoint count");
  e.sample_rate = get<double>(bin, "sample rate");
  e.t_start = get<double>(bin, "window start");
  for (std::size_t c = 0; c < e.n_channels; ++c) {
    const auto len = get<std::uint32_t>(bin, "channel name " + std::to_string(c));
    std::string name(len, '\0');
    if (!bin.read(name.data(), len)) throw EpochFormatError("truncated epoch file reading channel " + std::to_string(c));
    e.channels.push_back(std::move(name));
  }
  const auto n_adj = get<std::uint64_t>(bin, "adjacency count");
  for (std::uint64_t i = 0; i < n_adj; ++i) {
    const auto a = get<std::uint32_t>(bin, "adjacency pair " + std::to_string(i));
    const auto b = get<std::uint32_t>(bin, "adjacency pair " + std::to_string(i));
    e.adjacency.emplace_back(a, b);
  }
  e.data.resize(e.n_epochs * e.n_channels * e.n_times);
  if (!bin.read(reinterpret_cast<char*>(e.data.data()), static_cast<std::streamsize>(e.data.size() * sizeof(double)))) {
    throw EpochFormatError("truncated epoch file reading samples");
  }

  auto tsv_path = stem;
  tsv_path += ".tsv";
  std::ifstream tsv(tsv_path, std::ios::binary);
  if (!tsv) throw EpochFormatError("cannot read " + tsv_path.string());
  std::string line;
  if (!std::getline(tsv, line)) throw EpochFormatError(tsv_path.string() + ": missing header");
  const auto header = split(line, '\t');
  if (header.size() < 3 || header[0] != "subject" || header[1] != "token" || header[2] != "content") {
    throw EpochFormatError(tsv_path.string() + ": header must start with subject, token, content");
  }
  e.meta.numeric_names.assign(header.begin() + 3, header.end());
  std::size_t lineno = 1;
  while (std::getline(tsv, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != header.size()) {
      throw EpochFormatError(tsv_path.string() + " line " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    }
    e.meta.subject.push_back(f[0]);
    e.meta.token.push_back(f[1]);
    e.meta.content.push_back(f[2] == "1");
    for (std::size_t j = 3; j < f.size(); ++j) {
      double v = 0;
      auto [end, ec] = std::from_chars(f[j].data(), f[j].data() + f[j].size(), v);
      if (ec != std::errc() || end != f[j].data() + f[j].size()) {
        throw EpochFormatError(tsv_path.string() + " line " + std::to_string(lineno) + ": bad number in column " +
                               header[j]);
      }
      e.meta.numeric[header[j]].push_back(v);
    }
  }
  for (const auto& n : e.meta.numeric_names) e.meta.numeric[n];
  e.validate();
  return e;
}

}  // namespace rnng::erp
