#include "slotgraph/heads.hpp"

namespace slotgraph::heads {

using ad::Mat;
using ad::Var;

IntentHead build_intent_head(long n_intents, long d_in, ad::ParamStore& store,
                             ad::Rng& rng) {
  IntentHead h;
  h.w = &store.add("intent_head.w", rng.xavier(n_intents, d_in));
  h.b = &store.add("intent_head.b", Mat::Zero(1, n_intents));
  return h;
}

GateModule build_gate(long d_ctx, long d_g, ad::ParamStore& store,
                      ad::Rng& rng) {
  GateModule g;
  g.w = &store.add("gate.w", rng.xavier(d_g, d_ctx + d_g));
  g.b = &store.add("gate.b", Mat::Zero(1, d_g));
  return g;
}

BioTagger build_bio_tagger(long d_fused, ad::ParamStore& store, ad::Rng& rng) {
  BioTagger t;
  t.w = &store.add("bio.w", rng.xavier(3, d_fused));
  t.b = &store.add("bio.b", Mat::Zero(1, 3));
  return t;
}

SpanTyper build_span_typer(long n_types, long d_in, ad::ParamStore& store,
                           ad::Rng& rng) {
  SpanTyper t;
  t.w = &store.add("typer.w", rng.xavier(n_types, d_in));
  t.b = &store.add("typer.b", Mat::Zero(1, n_types));
  return t;
}

IntentHead attach_intent_head(ad::ParamStore& s) {
  return {&s.at("intent_head.w"), &s.at("intent_head.b")};
}
GateModule attach_gate(ad::ParamStore& s) {
  return {&s.at("gate.w"), &s.at("gate.b")};
}
BioTagger attach_bio_tagger(ad::ParamStore& s) {
  return {&s.at("bio.w"), &s.at("bio.b")};
}
SpanTyper attach_span_typer(ad::ParamStore& s) {
  return {&s.at("typer.w"), &s.at("typer.b")};
}

IntentForwardOut intent_forward(ad::Tape& tape, Var g0,
                                const labelsem::LabelTable& table,
                                const labelsem::AttentionModule& attn,
                                const IntentHead& head) {
  auto la = labelsem::label_attention(g0, table.combined(tape), attn, tape);
  Var joint = ad::concat_cols(la.context, g0);
  Var probs = ad::softmax_rows(
      ad::linear(joint, tape.leaf(*head.w), tape.leaf(*head.b)));
  return {probs, la.context};
}

Var intent_loss(Var probs, int gold_intent) {
  if (gold_intent < 0 || gold_intent >= probs.cols()) {
    throw ad::DimensionMismatch("intent gold id out of range");
  }
  return ad::scale(ad::log_clamped(ad::pick(probs, 0, gold_intent)), -1.0);
}

Var gate_fuse(ad::Tape& tape, Var h_intent, Var g, Var h,
              const GateModule& gate) {
  long n = g.rows();
  if (h.rows() != n) throw ad::DimensionMismatch("gate_fuse row counts");
  Var ctx = ad::broadcast_row(h_intent, n);
  Var gate_in = ad::concat_cols(ctx, g);
  Var gate_vals = ad::sigmoid(
      ad::linear(gate_in, tape.leaf(*gate.w), tape.leaf(*gate.b)));
  return ad::concat_cols(ad::cmul(gate_vals, g), h);
}

Var bio_forward(Var fused, const BioTagger& tagger, ad::Tape& tape) {
  return ad::softmax_rows(
      ad::linear(fused, tape.leaf(*tagger.w), tape.leaf(*tagger.b)));
}

Var bio_loss(Var dists, const std::vector<corpus::Bio>& gold, ad::Tape& tape) {
  long n_words = static_cast<long>(gold.size());
  if (dists.rows() != n_words + 2) {
    throw ad::DimensionMismatch("bio_loss rows vs gold length");
  }
  Var total = tape.constant(Mat::Zero(1, 1));
  for (long i = 0; i < n_words; ++i) {
    long cls = static_cast<long>(gold[static_cast<std::size_t>(i)]);
    Var nll = ad::scale(ad::log_clamped(ad::pick(dists, i + 1, cls)), -1.0);
    total = ad::add(total, nll);
  }
  return total;
}

Var span_repr(Var h, int l, int r) {
  long n_words = h.rows() - 2;
  if (l < 1 || r < l || r > n_words) throw corpus::OutOfRange();
  long count = r - l + 1;
  return ad::scale(ad::mean_of_rows(ad::rows(h, l, count)),
                   static_cast<double>(count));
}

Var slot_type_forward(ad::Tape& tape, Var r,
                      const labelsem::LabelTable& table,
                      const labelsem::AttentionModule& attn,
                      const SpanTyper& typer) {
  auto la = labelsem::label_attention(r, table.combined(tape), attn, tape);
  return ad::softmax_rows(
      ad::linear(la.context, tape.leaf(*typer.w), tape.leaf(*typer.b)));
}

Var slot_type_forward_direct(ad::Tape& tape, Var r, const SpanTyper& typer) {
  return ad::softmax_rows(
      ad::linear(r, tape.leaf(*typer.w), tape.leaf(*typer.b)));
}

Var slot_type_loss(const std::vector<Var>& dists,
                   const std::vector<int>& gold_types, ad::Tape& tape) {
  if (dists.size() != gold_types.size()) {
    throw ad::DimensionMismatch("slot_type_loss arity");
  }
  Var total = tape.constant(Mat::Zero(1, 1));
  for (std::size_t k = 0; k < dists.size(); ++k) {
    Var nll = ad::scale(
        ad::log_clamped(ad::pick(dists[k], 0, gold_types[k])), -1.0);
    total = ad::add(total, nll);
  }
  return total;
}

}  // namespace slotgraph::heads
