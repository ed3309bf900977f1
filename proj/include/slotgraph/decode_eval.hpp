#pragma once

#include "slotgraph/corpus.hpp"

#include <Eigen/Dense>

#include <vector>

namespace slotgraph::decode_eval {

struct Prediction {
  int intent = 0;
  std::vector<corpus::Span> spans;
};

struct MetricsReport {
  double slot_f1 = 0.0;
  double slot_precision = 0.0;
  double slot_recall = 0.0;
  double intent_acc = 0.0;
  double semantic_acc = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long n_sentences = 0;
};

/// Untyped span geometry (l, r), 1-based inclusive.
struct PlainSpan {
  int l = 0;
  int r = 0;
  bool operator==(const PlainSpan&) const = default;
};

/// Greedy per-token argmax (ties resolved toward the lower class index in
/// the fixed O < B < I order) followed by run extraction. A dangling I
/// opens a new span as if it were B.
std::vector<PlainSpan> decode_bio(const Eigen::MatrixXd& word_dists);

/// Same run extraction from already-chosen tags.
std::vector<PlainSpan> decode_tags(const std::vector<corpus::Bio>& tags);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

/// Micro-averaged entity-level scores; a true positive requires the exact
/// (l, r, type) triple to match.
PRF entity_f1(const std::vector<std::vector<corpus::Span>>& preds,
              const std::vector<std::vector<corpus::Span>>& golds);

double intent_accuracy(const std::vector<int>& preds,
                       const std::vector<int>& golds);

/// Fraction of sentences with the intent and the full span set both exact.
double semantic_accuracy(const std::vector<Prediction>& preds,
                         const std::vector<int>& gold_intents,
                         const std::vector<std::vector<corpus::Span>>& gold_spans);

MetricsReport evaluate(const std::vector<Prediction>& preds,
                       const std::vector<int>& gold_intents,
                       const std::vector<std::vector<corpus::Span>>& gold_spans);

}  // namespace slotgraph::decode_eval
