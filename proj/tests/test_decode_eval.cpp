#include <doctest.h>

#include "slotgraph/decode_eval.hpp"

#include <random>

using namespace slotgraph;
using namespace slotgraph::decode_eval;
using corpus::Bio;
using corpus::Span;

namespace {

/// Reference decoder written as a direct scan, independent of decode_tags:
/// walk the string; B always opens; I extends when an entity is open at the
/// previous position, otherwise opens (repair); O closes.
std::vector<PlainSpan> reference_decode(const std::vector<Bio>& tags) {
  std::vector<PlainSpan> out;
  bool open = false;
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    switch (tags[i]) {
      case Bio::O:
        open = false;
        break;
      case Bio::B:
        out.push_back({i + 1, i + 1});
        open = true;
        break;
      case Bio::I:
        if (open) {
          out.back().r = i + 1;
        } else {
          out.push_back({i + 1, i + 1});
          open = true;
        }
        break;
    }
  }
  return out;
}

Eigen::MatrixXd one_hot(const std::vector<Bio>& tags) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<long>(tags.size()), 3);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    d(static_cast<long>(i), static_cast<long>(tags[i])) = 1.0;
  }
  return d;
}

}  // namespace

TEST_CASE("decode_bio spot cases") {
  using V = std::vector<PlainSpan>;
  CHECK(decode_tags({Bio::O, Bio::B, Bio::I, Bio::I, Bio::O, Bio::B}) ==
        V{{2, 4}, {6, 6}});
  CHECK(decode_tags({Bio::O, Bio::O, Bio::O}) == V{});
  CHECK(decode_tags({Bio::I, Bio::I}) == V{{1, 2}});  // repair rule
  CHECK(decode_tags({Bio::B, Bio::B}) == V{{1, 1}, {2, 2}});
}

TEST_CASE("decode_bio equals the exhaustive reference for n <= 6") {
  for (int n = 1; n <= 6; ++n) {
    long total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (long code = 0; code < total; ++code) {
      long c = code;
      std::vector<Bio> tags;
      for (int i = 0; i < n; ++i) {
        tags.push_back(static_cast<Bio>(c % 3));
        c /= 3;
      }
      CAPTURE(code);
      CHECK(decode_bio(one_hot(tags)) == reference_decode(tags));
      CHECK(decode_tags(tags) == reference_decode(tags));
    }
  }
}

TEST_CASE("decode_bio argmax ties break toward O < B < I") {
  Eigen::MatrixXd d(2, 3);
  d << 0.4, 0.4, 0.2,   // O vs B tie -> O
       0.1, 0.45, 0.45; // B vs I tie -> B
  CHECK(decode_bio(d) == std::vector<PlainSpan>{{2, 2}});
}

TEST_CASE("entity_f1 closed forms") {
  using SV = std::vector<std::vector<Span>>;
  auto prf = entity_f1(SV{{{2, 3, 0}}}, SV{{{2, 3, 0}}});
  CHECK(prf.precision == 1.0);
  CHECK(prf.recall == 1.0);
  CHECK(prf.f1 == 1.0);

  prf = entity_f1(SV{{{2, 3, 0}}}, SV{{{2, 3, 0}, {5, 5, 1}}});
  CHECK(prf.precision == 1.0);
  CHECK(prf.recall == doctest::Approx(0.5));
  CHECK(prf.f1 == doctest::Approx(2.0 / 3));

  // type mismatch counts as both fp and fn
  prf = entity_f1(SV{{{2, 3, 1}}}, SV{{{2, 3, 0}}});
  CHECK(prf.tp == 0);
  CHECK(prf.fp == 1);
  CHECK(prf.fn == 1);
  CHECK(prf.f1 == 0.0);

  // no predictions and no golds: all 0/0 defined as 0
  prf = entity_f1(SV{{}}, SV{{}});
  CHECK(prf.f1 == 0.0);
}

TEST_CASE("swapping preds and golds swaps precision and recall") {
  std::mt19937_64 gen(17);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<std::vector<Span>> a(3), b(3);
    for (int s = 0; s < 3; ++s) {
      for (int k = 0; k < static_cast<int>(gen() % 3); ++k) {
        int l = 1 + static_cast<int>(gen() % 6);
        a[s].push_back({l, l + static_cast<int>(gen() % 2),
                        static_cast<int>(gen() % 2)});
      }
      for (int k = 0; k < static_cast<int>(gen() % 3); ++k) {
        int l = 1 + static_cast<int>(gen() % 6);
        b[s].push_back({l, l + static_cast<int>(gen() % 2),
                        static_cast<int>(gen() % 2)});
      }
    }
    auto ab = entity_f1(a, b);
    auto ba = entity_f1(b, a);
    CHECK(ab.precision == doctest::Approx(ba.recall));
    CHECK(ab.recall == doctest::Approx(ba.precision));
    CHECK(ab.f1 == doctest::Approx(ba.f1));
  }
}

TEST_CASE("intent and semantic accuracy") {
  CHECK(intent_accuracy({1, 2}, {1, 2}) == 1.0);
  CHECK(intent_accuracy({1, 2}, {3, 4}) == 0.0);
  CHECK(intent_accuracy({1, 2}, {1, 4}) == 0.5);

  std::vector<Prediction> preds = {
      {0, {{1, 2, 0}}}, {1, {}}, {0, {{3, 3, 1}}}, {2, {{1, 1, 0}}}};
  std::vector<int> gold_intents = {0, 1, 0, 2};
  std::vector<std::vector<Span>> gold_spans = {
      {{1, 2, 0}}, {}, {{3, 3, 1}}, {{2, 2, 0}}};  // last span wrong
  CHECK(semantic_accuracy(preds, gold_intents, gold_spans) ==
        doctest::Approx(0.75));

  // intent right but span wrong scores zero for that sentence
  std::vector<Prediction> p2 = {{0, {{1, 1, 0}}}};
  CHECK(semantic_accuracy(p2, {0}, {{{1, 2, 0}}}) == 0.0);

  // all fully correct
  CHECK(semantic_accuracy(preds, gold_intents,
                          {{{1, 2, 0}}, {}, {{3, 3, 1}}, {{1, 1, 0}}}) == 1.0);
}

TEST_CASE("semantic_acc <= min(intent_acc, slot exact-match rate)") {
  std::mt19937_64 gen(29);
  for (int iter = 0; iter < 100; ++iter) {
    int n = 1 + static_cast<int>(gen() % 8);
    std::vector<Prediction> preds(n);
    std::vector<int> gold_intents(n);
    std::vector<std::vector<Span>> gold_spans(n);
    long slot_exact = 0;
    for (int i = 0; i < n; ++i) {
      preds[i].intent = static_cast<int>(gen() % 3);
      gold_intents[i] = static_cast<int>(gen() % 3);
      if (gen() % 2) preds[i].spans.push_back({1, 1, static_cast<int>(gen() % 2)});
      if (gen() % 2) gold_spans[i].push_back({1, 1, static_cast<int>(gen() % 2)});
      if (preds[i].spans == gold_spans[i]) ++slot_exact;
    }
    auto rep = evaluate(preds, gold_intents, gold_spans);
    double slot_rate = static_cast<double>(slot_exact) / n;
    CHECK(rep.semantic_acc <= std::min(rep.intent_acc, slot_rate) + 1e-12);
  }
}
