#include "slotgraph/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace slotgraph::trainer {

using ad::Mat;
using ad::Var;

void TrainConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::invalid_argument("gamma must be in [0,1]");
  }
  if (batch_size <= 0 || lr <= 0.0 || epochs <= 0) {
    throw std::invalid_argument("batch_size, lr and epochs must be positive");
  }
}

LossReport joint_loss(double l_slot1, double l_slot2, double l_intent,
                      double gamma) {
  LossReport r;
  r.l_slot1 = l_slot1;
  r.l_slot2 = l_slot2;
  r.l_intent = l_intent;
  r.l_total = (1.0 - gamma) * (l_slot1 + l_slot2) + gamma * l_intent;
  return r;
}

void Adam::step(ad::ParamStore& params, double clip_norm) {
  if (clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& p : params.items()) {
      if (p->trainable) sq += p->grad.squaredNorm();
    }
    double norm = std::sqrt(sq);
    if (norm > clip_norm) {
      double s = clip_norm / norm;
      for (auto& p : params.items()) {
        if (p->trainable) p->grad *= s;
      }
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (auto& p : params.items()) {
    if (!p->trainable) continue;
    p->adam_m = b1_ * p->adam_m + (1.0 - b1_) * p->grad;
    p->adam_v.array() = b2_ * p->adam_v.array() +
                        (1.0 - b2_) * p->grad.array().square();
    Mat m_hat = p->adam_m / bc1;
    Mat v_hat = p->adam_v / bc2;
    p->value.array() -=
        lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
  }
}

std::vector<depgraph::AdjacencyMatrix> adjacencies(
    const std::vector<depgraph::DepParse>& parses) {
  std::vector<depgraph::AdjacencyMatrix> out;
  out.reserve(parses.size());
  for (const auto& p : parses) out.push_back(depgraph::build_adjacency(p));
  return out;
}

decode_eval::MetricsReport evaluate(
    const model::Model& m, const corpus::Dataset& data,
    const std::vector<depgraph::AdjacencyMatrix>& adj) {
  if (data.samples.size() != adj.size()) {
    throw std::invalid_argument("evaluate: parses not aligned with dataset");
  }
  std::vector<decode_eval::Prediction> preds;
  std::vector<int> gold_intents;
  std::vector<std::vector<corpus::Span>> gold_spans;
  preds.reserve(data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    preds.push_back(m.predict(data.samples[i].utterance, adj[i]));
    gold_intents.push_back(data.samples[i].intent.intent);
    gold_spans.push_back(data.samples[i].slots.spans);
  }
  return decode_eval::evaluate(preds, gold_intents, gold_spans);
}

Trainer::Trainer(model::Model& m, TrainConfig cfg)
    : model_(m),
      cfg_(cfg),
      opt_(cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps),
      shuffle_rng_(cfg.seed),
      dropout_rng_(cfg.seed ^ 0x9e3779b97f4a7c15ULL) {
  cfg_.validate();
}

LossReport Trainer::train_step(
    const corpus::Dataset& data,
    const std::vector<depgraph::AdjacencyMatrix>& adj,
    const std::vector<std::size_t>& batch) {
  if (batch.empty()) throw EmptyDataset();
  ad::Tape tape;
  Var sum_intent = tape.constant(Mat::Zero(1, 1));
  Var sum_slot1 = tape.constant(Mat::Zero(1, 1));
  Var sum_slot2 = tape.constant(Mat::Zero(1, 1));
  for (std::size_t idx : batch) {
    const corpus::Sample& s = data.samples[idx];
    auto fwd = model_.forward(tape, s.utterance, adj[idx], /*train=*/true,
                              &dropout_rng_);
    auto losses = model_.losses(tape, fwd, s);
    sum_intent = ad::add(sum_intent, losses.intent);
    sum_slot1 = ad::add(sum_slot1, losses.slot1);
    sum_slot2 = ad::add(sum_slot2, losses.slot2);
  }
  double inv_b = 1.0 / static_cast<double>(batch.size());
  Var mean_intent = ad::scale(sum_intent, inv_b);
  Var mean_slot1 = ad::scale(sum_slot1, inv_b);
  Var mean_slot2 = ad::scale(sum_slot2, inv_b);
  Var total = ad::add(
      ad::scale(ad::add(mean_slot1, mean_slot2), 1.0 - cfg_.gamma),
      ad::scale(mean_intent, cfg_.gamma));

  model_.params().zero_grad();
  tape.backward(total);
  opt_.step(model_.params(), cfg_.clip_norm);

  return joint_loss(mean_slot1.scalar(), mean_slot2.scalar(),
                    mean_intent.scalar(), cfg_.gamma);
}

TrainResult Trainer::train_loop(
    const corpus::Dataset& train,
    const std::vector<depgraph::AdjacencyMatrix>& train_adj,
    const corpus::Dataset& dev,
    const std::vector<depgraph::AdjacencyMatrix>& dev_adj) {
  if (train.samples.empty()) throw EmptyDataset();

  TrainResult result;
  std::vector<Mat> best_values;
  double best_sem = -1.0;
  long best_epoch = -1;

  std::vector<std::size_t> order(train.samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (long epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng_.gen());

    double wi = 0, w1 = 0, w2 = 0;
    long n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg_.batch_size)) {
      std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg_.batch_size));
      std::vector<std::size_t> batch(order.begin() + start,
                                     order.begin() + end);
      LossReport lr = train_step(train, train_adj, batch);
      wi += lr.l_intent;
      w1 += lr.l_slot1;
      w2 += lr.l_slot2;
      ++n_batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train = joint_loss(w1 / n_batches, w2 / n_batches, wi / n_batches,
                           cfg_.gamma);
    rec.dev = evaluate(model_, dev, dev_adj);
    result.history.push_back(rec);

    if (rec.dev.semantic_acc > best_sem) {
      best_sem = rec.dev.semantic_acc;
      best_epoch = epoch;
      best_values.clear();
      for (const auto& p : model_.params().items()) {
        best_values.push_back(p->value);
      }
    }
  }

  if (best_epoch >= 0) {
    auto& items = model_.params().items();
    for (std::size_t i = 0; i < items.size(); ++i) {
      items[i]->value = best_values[i];
    }
  }
  result.best_epoch = best_epoch;
  result.best_dev_semantic = best_sem;
  return result;
}

}  // namespace slotgraph::trainer
