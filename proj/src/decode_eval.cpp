#include "slotgraph/decode_eval.hpp"

#include <algorithm>
#include <stdexcept>

namespace slotgraph::decode_eval {

using corpus::Bio;
using corpus::Span;

std::vector<PlainSpan> decode_tags(const std::vector<Bio>& tags) {
  std::vector<PlainSpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    int pos = static_cast<int>(i) + 1;
    switch (tags[i]) {
      case Bio::O:
        break;
      case Bio::B:
        spans.push_back(PlainSpan{pos, pos});
        break;
      case Bio::I:
        if (!spans.empty() && spans.back().r == pos - 1 &&
            tags[i - 1] != Bio::O) {
          spans.back().r = pos;
        } else {
          spans.push_back(PlainSpan{pos, pos});  // dangling I repaired as B
        }
        break;
    }
  }
  return spans;
}

std::vector<PlainSpan> decode_bio(const Eigen::MatrixXd& word_dists) {
  if (word_dists.cols() != 3) {
    throw std::invalid_argument("decode_bio expects 3-column distributions");
  }
  std::vector<Bio> tags;
  tags.reserve(static_cast<std::size_t>(word_dists.rows()));
  for (long i = 0; i < word_dists.rows(); ++i) {
    long best = 0;
    for (long c = 1; c < 3; ++c) {
      if (word_dists(i, c) > word_dists(i, best)) best = c;
    }
    tags.push_back(static_cast<Bio>(best));
  }
  return decode_tags(tags);
}

PRF entity_f1(const std::vector<std::vector<Span>>& preds,
              const std::vector<std::vector<Span>>& golds) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument("entity_f1: unaligned sentence lists");
  }
  PRF out;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    std::vector<Span> gold = golds[s];
    for (const Span& p : preds[s]) {
      auto it = std::find(gold.begin(), gold.end(), p);
      if (it != gold.end()) {
        ++out.tp;
        gold.erase(it);
      } else {
        ++out.fp;
      }
    }
    out.fn += static_cast<long>(gold.size());
  }
  out.precision = out.tp + out.fp == 0
                      ? 0.0
                      : static_cast<double>(out.tp) / (out.tp + out.fp);
  out.recall = out.tp + out.fn == 0
                   ? 0.0
                   : static_cast<double>(out.tp) / (out.tp + out.fn);
  out.f1 = out.precision + out.recall == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall /
                     (out.precision + out.recall);
  return out;
}

double intent_accuracy(const std::vector<int>& preds,
                       const std::vector<int>& golds) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument("intent_accuracy: unaligned lists");
  }
  if (preds.empty()) return 0.0;
  long correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == golds[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

namespace {

bool spans_exact(const std::vector<Span>& a, const std::vector<Span>& b) {
  std::vector<Span> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

}  // namespace

double semantic_accuracy(
    const std::vector<Prediction>& preds,
    const std::vector<int>& gold_intents,
    const std::vector<std::vector<Span>>& gold_spans) {
  if (preds.size() != gold_intents.size() ||
      preds.size() != gold_spans.size()) {
    throw std::invalid_argument("semantic_accuracy: unaligned lists");
  }
  if (preds.empty()) return 0.0;
  long correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].intent == gold_intents[i] &&
        spans_exact(preds[i].spans, gold_spans[i])) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

MetricsReport evaluate(
    const std::vector<Prediction>& preds,
    const std::vector<int>& gold_intents,
    const std::vector<std::vector<Span>>& gold_spans) {
  MetricsReport r;
  std::vector<std::vector<Span>> pred_spans;
  std::vector<int> pred_intents;
  pred_spans.reserve(preds.size());
  for (const auto& p : preds) {
    pred_spans.push_back(p.spans);
    pred_intents.push_back(p.intent);
  }
  PRF prf = entity_f1(pred_spans, gold_spans);
  r.slot_f1 = prf.f1;
  r.slot_precision = prf.precision;
  r.slot_recall = prf.recall;
  r.tp = prf.tp;
  r.fp = prf.fp;
  r.fn = prf.fn;
  r.intent_acc = intent_accuracy(pred_intents, gold_intents);
  r.semantic_acc = semantic_accuracy(preds, gold_intents, gold_spans);
  r.n_sentences = static_cast<long>(preds.size());
  return r;
}

}  // namespace slotgraph::decode_eval
