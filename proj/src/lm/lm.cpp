#include "rnng/lm/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "rnng/nn/checkpoint.hpp"
#include "rnng/nn/kernels.hpp"

namespace rnng::lm {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

LmModel::LmModel(corpus::Vocab vocab, LmConfig config) : vocab_(std::move(vocab)), config_(config) {
  std::mt19937_64 rng(config_.seed);
  const std::size_t v = vocab_.word_count() + 1;
  embedding_ = &params_.add_uniform("lm_embedding", {v, config_.embedding}, nn::kInitScale, rng);
  cell_ = nn::RnnCellParams::create(params_, "lm_lstm", config_.embedding, config_.hidden, rng);
  output_ = nn::MlpParams::create(params_, "lm_output", {config_.hidden, v}, rng);
}

void LmModel::save(const std::filesystem::path& path) const {
  nlohmann::json meta = {{"model", "lstm-lm"},
                         {"embedding", config_.embedding},
                         {"hidden", config_.hidden},
                         {"seed", config_.seed},
                         {"vocab_hash", hex64(vocab_.hash())},
                         {"vocab", vocab_.to_json()}};
  nn::save_checkpoint(path, params_, meta);
}

LmModel LmModel::load(const std::filesystem::path& path) {
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  const auto& meta = ckpt.metadata;
  if (meta.value("model", "") != "lstm-lm") throw nn::CheckpointError(path.string() + " is not a language model");
  corpus::Vocab vocab = corpus::Vocab::from_json(meta.at("vocab"));
  if (hex64(vocab.hash()) != meta.value("vocab_hash", "")) {
    throw nn::CheckpointError("vocabulary hash mismatch in " + path.string());
  }
  LmConfig cfg;
  cfg.embedding = meta.at("embedding").get<std::size_t>();
  cfg.hidden = meta.at("hidden").get<std::size_t>();
  cfg.seed = meta.at("seed").get<std::uint64_t>();
  LmModel model(std::move(vocab), cfg);
  nn::restore_parameters(model.params_, ckpt);
  return model;
}

std::vector<WordId> LmModel::encode(std::span<const std::string> tokens) const {
  return corpus::map_sentence(std::vector<std::string>(tokens.begin(), tokens.end()), vocab_);
}

void LmModel::check_ids(std::span<const WordId> ids) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab_.word_count()) {
      throw std::out_of_range("token " + std::to_string(i) + " has id " + std::to_string(ids[i]) +
                              " outside the vocabulary; map tokens through the unknown classes first");
    }
  }
}

std::vector<double> LmModel::token_log_probs(std::span<const WordId> ids) const {
  check_ids(ids);
  std::vector<double> out;
  out.reserve(ids.size() + 1);
  std::vector<double> h(config_.hidden, 0.0), c(config_.hidden, 0.0);
  const std::size_t cols = embedding_->value.cols();
  auto embed = [&](std::size_t row) { return embedding_->value.values().subspan(row * cols, cols); };
  WordId input = bos();
  for (std::size_t i = 0; i <= ids.size(); ++i) {
    nn::LstmOutput o = nn::lstm_step(embed(input), h, c, cell_);
    h = std::move(o.h);
    c = std::move(o.c);
    const auto lp = nn::kernels::log_softmax(nn::mlp_forward(h, output_));
    const WordId target = i < ids.size() ? ids[i] : eos();
    out.push_back(lp[target]);
    if (i < ids.size()) input = ids[i];
  }
  return out;
}

nn::Expr LmModel::sentence_nll(nn::Graph& g, std::span<const WordId> ids, double dropout_rate,
                               std::mt19937_64* rng) const {
  check_ids(ids);
  if (dropout_rate > 0.0 && !rng) throw std::invalid_argument("sentence_nll: dropout needs a generator");
  nn::Expr h = g.constant(std::vector<double>(config_.hidden, 0.0));
  nn::Expr c = h;
  std::vector<nn::Expr> terms;
  WordId input = bos();
  for (std::size_t i = 0; i <= ids.size(); ++i) {
    const nn::LstmExpr o = nn::lstm_step(g, g.lookup(*embedding_, input), h, c, cell_);
    h = o.h;
    c = o.c;
    const WordId target = i < ids.size() ? ids[i] : eos();
    const nn::Expr features = dropout_rate > 0.0 ? nn::dropout(g, h, dropout_rate, *rng) : h;
    terms.push_back(g.pick(g.log_softmax(nn::mlp_forward(g, features, output_)), target));
    if (i < ids.size()) input = ids[i];
  }
  return g.scale(g.sum(terms), -1.0);
}

namespace {

std::size_t prediction_count(std::span<const std::vector<WordId>> batch) {
  std::size_t n = 0;
  for (const auto& s : batch) n += s.size() + 1;
  return n;
}

nn::Expr batch_nll(nn::Graph& g, const LmModel& model, std::span<const std::vector<WordId>> batch,
                   double dropout = 0.0, std::mt19937_64* rng = nullptr) {
  std::vector<nn::Expr> losses;
  for (const auto& s : batch) losses.push_back(model.sentence_nll(g, s, dropout, rng));
  return g.sum(losses);
}

}  // namespace

double lm_batch_loss(const LmModel& model, std::span<const std::vector<WordId>> batch) {
  if (batch.empty()) throw std::invalid_argument("lm_batch_loss: empty batch");
  nn::Graph g;
  return g.scalar(batch_nll(g, model, batch)) / static_cast<double>(prediction_count(batch));
}

double lm_train_step(LmModel& model, nn::Adam& opt, std::span<const std::vector<WordId>> batch, double dropout,
                     std::mt19937_64* rng) {
  if (batch.empty()) throw std::invalid_argument("lm_train_step: empty batch");
  nn::Graph g;
  const nn::Expr loss =
      g.scale(batch_nll(g, model, batch, dropout, rng), 1.0 / static_cast<double>(prediction_count(batch)));
  const double value = g.scalar(loss);
  g.backward(loss);
  opt.step(model.params());
  return value;
}

std::vector<double> lm_surprisal_series(const LmModel& model, std::span<const std::string> tokens) {
  const auto lp = model.token_log_probs(model.encode(tokens));
  std::vector<double> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back(std::max(0.0, -lp[i] / std::numbers::ln2));
  return out;
}

double perplexity(const LmModel& model, std::span<const std::vector<std::string>> sentences) {
  if (sentences.empty()) throw std::invalid_argument("perplexity: empty corpus");
  double nll = 0.0;
  std::size_t n = 0;
  for (const auto& s : sentences) {
    for (double lp : model.token_log_probs(model.encode(s))) {
      nll -= lp;
      ++n;
    }
  }
  return std::exp(nll / static_cast<double>(n));
}

std::vector<LmEpochStats> train_lm(LmModel& model, const std::vector<std::vector<std::string>>& train,
                                   const std::vector<std::vector<std::string>>& dev, const LmTrainConfig& config,
                                   const std::function<void(const LmEpochStats&)>& on_epoch) {
  if (train.empty()) throw std::invalid_argument("train_lm: empty training set");
  std::vector<std::vector<WordId>> ids;
  for (const auto& s : train) ids.push_back(model.encode(s));
  const auto& eval = dev.empty() ? train : dev;
  const std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);

  std::vector<LmEpochStats> stats;
  stats.push_back({0, lm_batch_loss(model, ids), perplexity(model, eval)});
  if (on_epoch) on_epoch(stats.back());

  nn::Adam opt(config.adam);
  std::mt19937_64 dropout_rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  std::vector<std::size_t> order(ids.size());
  std::vector<std::vector<WordId>> batch;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed * 1000003ULL + epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double weighted = 0.0;
    std::size_t preds = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) batch.push_back(ids[order[i]]);
      const std::size_t n = prediction_count(batch);
      weighted += lm_train_step(model, opt, batch, config.dropout, &dropout_rng) * static_cast<double>(n);
      preds += n;
    }
    stats.push_back({epoch, weighted / static_cast<double>(preds), perplexity(model, eval)});
    if (on_epoch) on_epoch(stats.back());
  }
  return stats;
}

}  // namespace rnng::lm
