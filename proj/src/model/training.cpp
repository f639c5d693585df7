#include "rnng/model/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rnng::model {

std::vector<TrainingExample> prepare_examples(const RnngModel& model, const std::vector<corpus::Tree>& trees) {
  std::vector<TrainingExample> out;
  out.reserve(trees.size());
  for (const auto& t : trees) {
    out.push_back({model.to_model_actions(corpus::tree_to_actions(t)), corpus::count_terminals(t)});
  }
  return out;
}

namespace {

std::size_t action_total(std::span<const TrainingExample> batch) {
  std::size_t n = 0;
  for (const auto& ex : batch) n += ex.actions.size();
  return n;
}

nn::Expr summed_nll(nn::Graph& g, const RnngModel& model, std::span<const TrainingExample> batch,
                    const Limits& limits, double dropout = 0.0, std::mt19937_64* rng = nullptr) {
  std::vector<nn::Expr> losses;
  losses.reserve(batch.size());
  for (const auto& ex : batch) losses.push_back(model.oracle_nll(g, ex.actions, ex.length, limits, dropout, rng));
  return g.sum(losses);
}

}  // namespace

double batch_loss(const RnngModel& model, std::span<const TrainingExample> batch, const Limits& limits) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  nn::Graph g;
  return g.scalar(summed_nll(g, model, batch, limits)) / static_cast<double>(action_total(batch));
}

double train_step(RnngModel& model, nn::Adam& opt, std::span<const TrainingExample> batch, const Limits& limits,
                  double dropout, std::mt19937_64* rng) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  nn::Graph g;
  const nn::Expr loss = g.scale(summed_nll(g, model, batch, limits, dropout, rng),
                                1.0 / static_cast<double>(action_total(batch)));
  const double value = g.scalar(loss);
  g.backward(loss);
  opt.step(model.params());
  return value;
}

CorpusNll corpus_nll(const RnngModel& model, std::span<const TrainingExample> examples, const Limits& limits) {
  CorpusNll out;
  for (const auto& ex : examples) {
    out.nll -= model.sequence_log_prob(ex.actions, ex.length, limits);
    out.actions += ex.actions.size();
    out.words += ex.length;
  }
  return out;
}

std::vector<EpochStats> train_rnng(RnngModel& model, const std::vector<corpus::Tree>& train,
                                   const std::vector<corpus::Tree>& dev, const TrainConfig& config,
                                   const EpochCallback& on_epoch) {
  if (train.empty()) throw std::invalid_argument("train_rnng: empty training set");
  const auto train_ex = prepare_examples(model, train);
  const auto dev_ex = prepare_examples(model, dev.empty() ? train : dev);
  const std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);

  auto dev_ppl = [&] {
    const CorpusNll c = corpus_nll(model, dev_ex, config.limits);
    return std::exp(c.nll / static_cast<double>(std::max<std::size_t>(1, c.words)));
  };

  std::vector<EpochStats> stats;
  {
    const CorpusNll c = corpus_nll(model, train_ex, config.limits);
    stats.push_back({0, c.nll / static_cast<double>(c.actions), dev_ppl()});
    if (on_epoch) on_epoch(stats.back());
  }

  nn::Adam opt(config.adam);
  std::mt19937_64 dropout_rng(config.seed ^ 0xd1b54a32d192ed03ULL);
  std::vector<std::size_t> order(train_ex.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed * 1000003ULL + epoch);
    std::shuffle(order.begin(), order.end(), rng);

    double weighted = 0.0;
    std::size_t actions = 0;
    std::vector<TrainingExample> batch;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) batch.push_back(train_ex[order[i]]);
      const std::size_t n = action_total(batch);
      weighted += train_step(model, opt, batch, config.limits, config.dropout, &dropout_rng) * static_cast<double>(n);
      actions += n;
    }
    stats.push_back({epoch, weighted / static_cast<double>(actions), dev_ppl()});
    if (on_epoch) on_epoch(stats.back());
  }
  return stats;
}

}  // namespace rnng::model
