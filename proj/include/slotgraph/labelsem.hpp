#pragma once

#include "slotgraph/autodiff.hpp"
#include "slotgraph/encoder.hpp"

#include <string>
#include <vector>

namespace slotgraph::labelsem {

/// Per-label embeddings: a frozen description part plus a trainable global
/// part, combined by elementwise sum.
struct LabelTable {
  ad::Param* desc_part = nullptr;    // trainable = false
  ad::Param* global_part = nullptr;  // trainable = true
  long n_labels = 0;
  long d = 0;

  /// Combined view e_i = desc_i + global_i as a tape node.
  ad::Var combined(ad::Tape& tape) const;
};

/// Registers `<prefix>.desc` (frozen, rows from the encoder's description
/// embeddings) and `<prefix>.global` (seeded uniform(-0.1, 0.1)).
LabelTable build_table(const std::string& prefix,
                       const std::vector<std::string>& label_names,
                       const corpus::LabelVocab& vocab,
                       const encoder::Encoder& enc,
                       const encoder::WordVocab& words,
                       ad::ParamStore& store,
                       ad::Rng& rng);

/// Attaches to an already-registered table (checkpoint load).
LabelTable attach_table(const std::string& prefix, ad::ParamStore& store);

/// Score-then-mix attention parameters. The score projects [e_i ∥ q]
/// through a tanh layer before the scoring dot product; a purely linear
/// score would make the weights independent of the query (the query term
/// is constant across labels and cancels in the softmax), which would
/// collapse every query to one shared context.
struct AttentionModule {
  ad::Param* proj = nullptr;    // d_hidden×(d_label + d_query)
  ad::Param* proj_b = nullptr;  // 1×d_hidden
  ad::Param* w = nullptr;       // 1×d_hidden
  ad::Param* b = nullptr;       // 1×1
};

AttentionModule build_attention(const std::string& prefix, long d_label,
                                long d_query, ad::ParamStore& store,
                                ad::Rng& rng);
AttentionModule attach_attention(const std::string& prefix,
                                 ad::ParamStore& store);

struct LabelAttentionOut {
  ad::Var context;  // 1×d, convex combination of table rows
  ad::Var weights;  // 1×n_labels, sums to 1
};

/// weights = softmax_i(w·tanh(P[e_i ∥ query] + p_b) + b);
/// context = Σ weights_i e_i.
LabelAttentionOut label_attention(ad::Var query, ad::Var table,
                                  const AttentionModule& attn,
                                  ad::Tape& tape);

}  // namespace slotgraph::labelsem
