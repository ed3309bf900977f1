#pragma once

#include "slotgraph/decode_eval.hpp"
#include "slotgraph/model.hpp"

#include <vector>

namespace slotgraph::trainer {

struct TrainConfig {
  double gamma = 0.5;
  long batch_size = 16;
  double lr = 1e-5;
  long epochs = 50;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;

  void validate() const;
};

struct LossReport {
  double l_intent = 0.0;
  double l_slot1 = 0.0;
  double l_slot2 = 0.0;
  double l_total = 0.0;
};

/// L = (1−γ)(L_slot1 + L_slot2) + γ·L_intent.
LossReport joint_loss(double l_slot1, double l_slot2, double l_intent,
                      double gamma);

/// Adam with optional global-norm gradient clipping. Frozen tensors are
/// never touched.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(ad::ParamStore& params, double clip_norm = 0.0);
  long steps_taken() const { return t_; }

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
};

struct EmptyDataset : std::runtime_error {
  EmptyDataset() : std::runtime_error("dataset has no samples") {}
};

struct EpochRecord {
  long epoch = 0;
  LossReport train;
  decode_eval::MetricsReport dev;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  long best_epoch = 0;
  double best_dev_semantic = 0.0;
};

std::vector<depgraph::AdjacencyMatrix> adjacencies(
    const std::vector<depgraph::DepParse>& parses);

decode_eval::MetricsReport evaluate(
    const model::Model& m, const corpus::Dataset& data,
    const std::vector<depgraph::AdjacencyMatrix>& adj);

class Trainer {
 public:
  Trainer(model::Model& m, TrainConfig cfg);

  /// One optimizer step on a batch (indices into `data`). Losses are means
  /// over the batch.
  LossReport train_step(const corpus::Dataset& data,
                        const std::vector<depgraph::AdjacencyMatrix>& adj,
                        const std::vector<std::size_t>& batch);

  /// Seeded-shuffle epochs over train, dev evaluation each epoch, best
  /// checkpoint (highest dev semantic accuracy, earlier epoch on ties)
  /// restored into the model before returning.
  TrainResult train_loop(const corpus::Dataset& train,
                         const std::vector<depgraph::AdjacencyMatrix>& train_adj,
                         const corpus::Dataset& dev,
                         const std::vector<depgraph::AdjacencyMatrix>& dev_adj);

  const TrainConfig& config() const { return cfg_; }

 private:
  model::Model& model_;
  TrainConfig cfg_;
  Adam opt_;
  ad::Rng shuffle_rng_;
  ad::Rng dropout_rng_;
};

}  // namespace slotgraph::trainer
