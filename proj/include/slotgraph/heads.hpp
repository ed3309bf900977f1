#pragma once

#include "slotgraph/autodiff.hpp"
#include "slotgraph/corpus.hpp"
#include "slotgraph/labelsem.hpp"

#include <vector>

namespace slotgraph::heads {

struct IntentHead {
  ad::Param* w = nullptr;  // |I|×d_query_total
  ad::Param* b = nullptr;  // 1×|I|
};
struct GateModule {
  ad::Param* w = nullptr;  // d_g×(d_ctx+d_g)
  ad::Param* b = nullptr;  // 1×d_g
};
struct BioTagger {
  ad::Param* w = nullptr;  // 3×(d_g+d), class order O, B, I
  ad::Param* b = nullptr;  // 1×3
};
struct SpanTyper {
  ad::Param* w = nullptr;  // |S|×d
  ad::Param* b = nullptr;  // 1×|S|
};

IntentHead build_intent_head(long n_intents, long d_in, ad::ParamStore& store,
                             ad::Rng& rng);
GateModule build_gate(long d_ctx, long d_g, ad::ParamStore& store,
                      ad::Rng& rng);
BioTagger build_bio_tagger(long d_fused, ad::ParamStore& store, ad::Rng& rng);
SpanTyper build_span_typer(long n_types, long d_in, ad::ParamStore& store,
                           ad::Rng& rng);

IntentHead attach_intent_head(ad::ParamStore& store);
GateModule attach_gate(ad::ParamStore& store);
BioTagger attach_bio_tagger(ad::ParamStore& store);
SpanTyper attach_span_typer(ad::ParamStore& store);

struct IntentForwardOut {
  ad::Var probs;     // 1×|I|
  ad::Var h_intent;  // 1×d label-attention context
};

/// probs = softmax(W_I [h^I ∥ g0] + b_I) with h^I from label attention.
IntentForwardOut intent_forward(ad::Tape& tape, ad::Var g0,
                                const labelsem::LabelTable& table,
                                const labelsem::AttentionModule& attn,
                                const IntentHead& head);

/// −log probs[gold], log clamped at 1e-12.
ad::Var intent_loss(ad::Var probs, int gold_intent);

/// Broadcast h_intent to every row, gate the syntactic features, append the
/// raw ones: row i = [σ(W_g[h^I ∥ g_i]+b_g) ⊙ g_i ∥ h_i].
ad::Var gate_fuse(ad::Tape& tape, ad::Var h_intent, ad::Var g, ad::Var h,
                  const GateModule& gate);

/// Per-row (O,B,I) distributions, placeholder rows included.
ad::Var bio_forward(ad::Var fused, const BioTagger& tagger, ad::Tape& tape);

/// Sum over word positions 1..N_w of −log p(gold); placeholders excluded.
ad::Var bio_loss(ad::Var dists, const std::vector<corpus::Bio>& gold,
                 ad::Tape& tape);

/// Sum of raw encoder rows l..r (1-based word positions).
ad::Var span_repr(ad::Var h, int l, int r);

/// Type distribution for one span representation via slot label attention.
ad::Var slot_type_forward(ad::Tape& tape, ad::Var r,
                          const labelsem::LabelTable& table,
                          const labelsem::AttentionModule& attn,
                          const SpanTyper& typer);

/// Ablated variant: typing logits directly from the span representation.
ad::Var slot_type_forward_direct(ad::Tape& tape, ad::Var r,
                                 const SpanTyper& typer);

/// Sum over entities of −log p(gold type); empty input contributes zero.
ad::Var slot_type_loss(const std::vector<ad::Var>& dists,
                       const std::vector<int>& gold_types, ad::Tape& tape);

}  // namespace slotgraph::heads
