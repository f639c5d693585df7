#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rnng/corpus/vocab.hpp"
#include "rnng/nn/graph.hpp"
#include "rnng/nn/layers.hpp"
#include "rnng/nn/optimizer.hpp"
#include "rnng/nn/tensor.hpp"

namespace rnng::lm {

using corpus::WordId;

struct LmConfig {
  std::size_t embedding = 256;
  std::size_t hidden = 256;
  std::uint64_t seed = 1;
};

/// Word-level LSTM language model. Inputs are the words plus a begin marker;
/// outputs are the words plus an end marker, which is predicted and counted.
class LmModel {
 public:
  LmModel(corpus::Vocab vocab, LmConfig config);

  static LmModel load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const corpus::Vocab& vocab() const { return vocab_; }
  const LmConfig& config() const { return config_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  /// Input row of the begin marker and output index of the end marker.
  WordId bos() const { return static_cast<WordId>(vocab_.word_count()); }
  WordId eos() const { return static_cast<WordId>(vocab_.word_count()); }
  std::size_t output_size() const { return vocab_.word_count() + 1; }

  std::vector<WordId> encode(std::span<const std::string> tokens) const;

  /// Natural-log probabilities of each word given its prefix, then of the end marker.
  std::vector<double> token_log_probs(std::span<const WordId> ids) const;
  nn::Expr sentence_nll(nn::Graph& g, std::span<const WordId> ids, double dropout_rate = 0.0,
                        std::mt19937_64* rng = nullptr) const;

 private:
  void check_ids(std::span<const WordId> ids) const;

  corpus::Vocab vocab_;
  LmConfig config_;
  nn::ParameterStore params_;
  nn::Parameter* embedding_ = nullptr;
  nn::RnnCellParams cell_;
  nn::MlpParams output_;
};

/// Mean per-prediction loss before the update (end markers included).
double lm_train_step(LmModel& model, nn::Adam& opt, std::span<const std::vector<WordId>> batch,
                     double dropout = 0.0, std::mt19937_64* rng = nullptr);
double lm_batch_loss(const LmModel& model, std::span<const std::vector<WordId>> batch);

/// -log2 P(w_i | w_1..w_{i-1}) for each token (no end marker).
std::vector<double> lm_surprisal_series(const LmModel& model, std::span<const std::string> tokens);

/// exp of the mean per-prediction NLL, end markers counted as predictions.
double perplexity(const LmModel& model, std::span<const std::vector<std::string>> sentences);

struct LmTrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 10;
  std::uint64_t seed = 1;
  double dropout = 0.0;
  nn::AdamConfig adam;
};

struct LmEpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_perplexity = 0.0;
};

std::vector<LmEpochStats> train_lm(LmModel& model, const std::vector<std::vector<std::string>>& train,
                                   const std::vector<std::vector<std::string>>& dev, const LmTrainConfig& config,
                                   const std::function<void(const LmEpochStats&)>& on_epoch = {});

}  // namespace rnng::lm
