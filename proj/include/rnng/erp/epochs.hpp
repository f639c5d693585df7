#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rnng::erp {

class EpochFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-epoch metadata: subject, token, content flag and numeric columns in file order.
struct EpochMetadata {
  std::vector<std::string> subject;
  std::vector<std::string> token;
  std::vector<bool> content;
  std::vector<std::string> numeric_names;
  std::map<std::string, std::vector<double>> numeric;

  std::size_t size() const { return subject.size(); }
  bool has(const std::string& column) const { return numeric.count(column) > 0; }
  const std::vector<double>& column(const std::string& name) const;
  void add_column(const std::string& name, std::vector<double> values);
  EpochMetadata select(const std::vector<std::size_t>& rows) const;
};

/// Epochs x channels x timepoints, row-major.
struct EpochSet {
  std::size_t n_epochs = 0;
  std::size_t n_channels = 0;
  std::size_t n_times = 0;
  double sample_rate = 500.0;
  double t_start = -0.3;  // seconds relative to word onset
  std::vector<std::string> channels;
  std::vector<std::pair<std::size_t, std::size_t>> adjacency;
  std::vector<double> data;
  EpochMetadata meta;

  double& at(std::size_t e, std::size_t c, std::size_t t) { return data[(e * n_channels + c) * n_times + t]; }
  double at(std::size_t e, std::size_t c, std::size_t t) const { return data[(e * n_channels + c) * n_times + t]; }
  double time_of(std::size_t t) const { return t_start + static_cast<double>(t) / sample_rate; }
  double t_end() const { return time_of(n_times - 1); }
  std::optional<std::size_t> channel_index(const std::string& name) const;
  /// Sample indices whose time falls in [from, to] (with half-sample slack).
  std::pair<std::size_t, std::size_t> sample_range(double from, double to) const;

  void validate() const;
  EpochSet select(const std::vector<std::size_t>& epochs) const;
};

bool operator==(const EpochSet& a, const EpochSet& b);

/// A bundle is two files: `<stem>.bin` (header and float64 samples) and `<stem>.tsv` (metadata).
void save_epochs(const std::filesystem::path& stem, const EpochSet& e);
EpochSet load_epochs(const std::filesystem::path& stem);

/// Standard 61-electrode 10-10 layout with 2D scalp positions.
struct Electrode {
  std::string name;
  double x, y;
};
const std::vector<Electrode>& montage61();
const std::vector<std::string>& montage16();

/// Symmetrized k-nearest-neighbour adjacency over the named electrodes.
std::vector<std::pair<std::size_t, std::size_t>> knn_adjacency(const std::vector<std::string>& channels,
                                                               std::size_t k = 4);
/// Rows x cols grid; 4-neighbour adjacency. Channel names are "g<r>_<c>".
std::pair<std::vector<std::string>, std::vector<std::pair<std::size_t, std::size_t>>> grid_layout(std::size_t rows,
                                                                                                   std::size_t cols);

struct InjectedEffect {
  std::string predictor = "target";
  std::vector<std::string> channels = {"Cz", "CP1", "CP2", "Pz"};
  double t_from = 0.3;
  double t_to = 0.5;
  double amplitude = 0.0;
};

struct SynthSpec {
  std::size_t subjects = 20;
  std::size_t epochs_per_subject = 100;
  std::size_t n_channels = 61;  // 61 (full montage), 16 (subset); other counts use a grid
  double sample_rate = 500.0;
  double t_start = -0.3;
  double t_end = 1.0;
  double noise_sd = 1.0;
  /// Between-subject spread of the effect size, as a fraction of the amplitude.
  double subject_effect_sd = 0.25;
  std::vector<std::string> controls = {"word_order", "log_freq"};
  InjectedEffect effect;
  std::uint64_t seed = 1;
};

/// Gaussian noise plus amplitude x predictor x a boxcar over the effect
/// channels and window. The predictor and the controls are standard normal
/// per epoch and stored as numeric metadata columns.
EpochSet synth_epochs(const SynthSpec& spec);

}  // namespace rnng::erp
