#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "rnng/corpus/tree.hpp"
#include "rnng/model/rnng.hpp"
#include "rnng/nn/optimizer.hpp"

namespace rnng::model {

/// A gold tree converted to model actions (teacher forcing input).
struct TrainingExample {
  std::vector<Action> actions;
  std::size_t length = 0;  // number of words
};

std::vector<TrainingExample> prepare_examples(const RnngModel& model, const std::vector<corpus::Tree>& trees);

/// Mean negative log-likelihood per action; no parameter update.
double batch_loss(const RnngModel& model, std::span<const TrainingExample> batch, const Limits& limits = {});

/// One teacher-forced update; returns the mean per-action loss before the update.
double train_step(RnngModel& model, nn::Adam& opt, std::span<const TrainingExample> batch,
                  const Limits& limits = {}, double dropout = 0.0, std::mt19937_64* rng = nullptr);

struct CorpusNll {
  double nll = 0.0;  // natural log
  std::size_t actions = 0;
  std::size_t words = 0;
};

CorpusNll corpus_nll(const RnngModel& model, std::span<const TrainingExample> examples, const Limits& limits = {});

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 10;
  std::uint64_t seed = 1;
  double dropout = 0.0;
  nn::AdamConfig adam;
  Limits limits;
};

struct EpochStats {
  std::size_t epoch = 0;         // 0 = before any update
  double train_loss = 0.0;       // mean per-action NLL over the epoch
  double dev_action_ppl = 0.0;   // exp(dev action NLL / dev words)
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Shuffles with a per-epoch seed, steps through mini-batches, and evaluates
/// dev action perplexity after every epoch (plus once before training).
std::vector<EpochStats> train_rnng(RnngModel& model, const std::vector<corpus::Tree>& train,
                                   const std::vector<corpus::Tree>& dev, const TrainConfig& config,
                                   const EpochCallback& on_epoch = {});

}  // namespace rnng::model
