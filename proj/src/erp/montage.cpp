#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "rnng/erp/epochs.hpp"

namespace rnng::erp {

const std::vector<Electrode>& montage61() {
  static const std::vector<Electrode> m = [] {
    std::vector<Electrode> out;
    auto row = [&](double y, std::vector<std::string> names, std::vector<double> xs) {
      for (std::size_t i = 0; i < names.size(); ++i) out.push_back({names[i], xs[i], y});
    };
    const std::vector<double> nine = {-4, -3, -2, -1, 0, 1, 2, 3, 4};
    row(4.0, {"Fp1", "Fpz", "Fp2"}, {-1.5, 0, 1.5});
    row(3.5, {"AF7", "AF3", "AFz", "AF4", "AF8"}, {-3.5, -1.5, 0, 1.5, 3.5});
    row(3.0, {"F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8"}, nine);
    row(2.0, {"FT7", "FC5", "FC3", "FC1", "FCz", "FC2", "FC4", "FC6", "FT8"}, nine);
    row(1.0, {"T7", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "T8"}, nine);
    row(0.0, {"TP7", "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6", "TP8"}, nine);
    row(-1.0, {"P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8"}, nine);
    row(-2.0, {"PO7", "PO3", "POz", "PO4", "PO8"}, {-3.5, -1.5, 0, 1.5, 3.5});
    row(-3.0, {"O1", "Oz", "O2"}, {-1.5, 0, 1.5});
    return out;
  }();
  return m;
}

const std::vector<std::string>& montage16() {
  static const std::vector<std::string> m = {"Fp1", "Fp2", "F3",  "Fz", "F4", "C3", "Cz", "C4",
                                             "CP1", "CP2", "P3", "Pz", "P4", "O1", "Oz", "O2"};
  return m;
}

std::vector<std::pair<std::size_t, std::size_t>> knn_adjacency(const std::vector<std::string>& channels,
                                                               std::size_t k) {
  std::vector<const Electrode*> pos;
  for (const auto& name : channels) {
    auto it = std::find_if(montage61().begin(), montage61().end(), [&](const Electrode& e) { return e.name == name; });
    if (it == montage61().end()) throw std::invalid_argument("no scalp position for channel " + name);
    pos.push_back(&*it);
  }
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pos.size(); ++j) {
      if (j != i) d.emplace_back(std::hypot(pos[i]->x - pos[j]->x, pos[i]->y - pos[j]->y), j);
    }
    std::sort(d.begin(), d.end());
    for (std::size_t n = 0; n < std::min(k, d.size()); ++n) {
      edges.insert({i, d[n].second});
      edges.insert({d[n].second, i});
    }
  }
  return {edges.begin(), edges.end()};
}

std::pair<std::vector<std::string>, std::vector<std::pair<std::size_t, std::size_t>>> grid_layout(std::size_t rows,
                                                                                                   std::size_t cols) {
  std::vector<std::string> names;
  std::vector<std::pair<std::size_t, std::size_t>> adj;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      names.push_back("g" + std::to_string(r) + "_" + std::to_string(c));
      const std::size_t i = r * cols + c;
      if (c + 1 < cols) {
        adj.emplace_back(i, i + 1);
        adj.emplace_back(i + 1, i);
      }
      if (r + 1 < rows) {
        adj.emplace_back(i, i + cols);
        adj.emplace_back(i + cols, i);
      }
    }
  }
  std::sort(adj.begin(), adj.end());
  return {names, adj};
}

EpochSet synth_epochs(const SynthSpec& spec) {
  if (spec.subjects == 0 || spec.epochs_per_subject == 0) throw std::invalid_argument("synth: need subjects and epochs");
  if (!(spec.sample_rate > 0) || !(spec.t_end > spec.t_start)) throw std::invalid_argument("synth: bad time window");
  EpochSet e;
  if (spec.n_channels == 61) {
    for (const auto& el : montage61()) e.channels.push_back(el.name);
    e.adjacency = knn_adjacency(e.channels);
  } else if (spec.n_channels == 16) {
    e.channels = montage16();
    e.adjacency = knn_adjacency(e.channels);
  } else {
    std::size_t rows = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(spec.n_channels))));
    while (spec.n_channels % rows) --rows;
    std::tie(e.channels, e.adjacency) = grid_layout(rows, spec.n_channels / rows);
  }
  e.n_channels = e.channels.size();
  e.sample_rate = spec.sample_rate;
  e.t_start = spec.t_start;
  e.n_times = static_cast<std::size_t>(std::llround((spec.t_end - spec.t_start) * spec.sample_rate)) + 1;
  e.n_epochs = spec.subjects * spec.epochs_per_subject;
  e.data.resize(e.n_epochs * e.n_channels * e.n_times);

  std::vector<bool> site(e.n_channels, false);
  if (spec.effect.amplitude != 0.0) {
    for (const auto& name : spec.effect.channels) {
      auto idx = e.channel_index(name);
      if (!idx) throw std::invalid_argument("synth: effect channel " + name + " is not in the montage");
      site[*idx] = true;
    }
  }
  const auto [t0, t1] = e.sample_range(spec.effect.t_from, spec.effect.t_to);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution is_content(0.6);
  std::vector<double> predictor(e.n_epochs);
  std::vector<std::vector<double>> controls(spec.controls.size(), std::vector<double>(e.n_epochs));
  std::vector<double> sent(e.n_epochs), idx(e.n_epochs);
  char buf[32];
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    const double amp = spec.effect.amplitude * (1.0 + spec.subject_effect_sd * normal(rng));
    std::snprintf(buf, sizeof buf, "s%02zu", s + 1);
    for (std::size_t j = 0; j < spec.epochs_per_subject; ++j) {
      const std::size_t ep = s * spec.epochs_per_subject + j;
      e.meta.subject.push_back(buf);
      e.meta.token.push_back("w" + std::to_string(j));
      e.meta.content.push_back(is_content(rng));
      sent[ep] = static_cast<double>(j / 10);
      idx[ep] = static_cast<double>(j % 10);
      predictor[ep] = normal(rng);
      for (auto& col : controls) col[ep] = normal(rng);
      for (std::size_t c = 0; c < e.n_channels; ++c) {
        for (std::size_t t = 0; t < e.n_times; ++t) {
          double v = spec.noise_sd * normal(rng);
          if (site[c] && t >= t0 && t < t1) v += amp * predictor[ep];
          e.at(ep, c, t) = v;
        }
      }
    }
  }
  e.meta.add_column("sent", std::move(sent));
  e.meta.add_column("idx", std::move(idx));
  e.meta.add_column(spec.effect.predictor, std::move(predictor));
  for (std::size_t i = 0; i < spec.controls.size(); ++i) e.meta.add_column(spec.controls[i], std::move(controls[i]));
  e.validate();
  return e;
}

}  // namespace rnng::erp
