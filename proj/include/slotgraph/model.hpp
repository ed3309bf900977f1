#pragma once

#include "slotgraph/autodiff.hpp"
#include "slotgraph/corpus.hpp"
#include "slotgraph/decode_eval.hpp"
#include "slotgraph/depgraph.hpp"
#include "slotgraph/encoder.hpp"
#include "slotgraph/gat.hpp"
#include "slotgraph/heads.hpp"
#include "slotgraph/labelsem.hpp"

#include <memory>
#include <optional>

namespace slotgraph::model {

struct ModelConfig {
  long d = 32;
  long d_g = 32;
  long gat_heads = 2;
  double gat_dropout = 0.0;
  long gat_layers = 1;
  long enc_layers = 1;
  long enc_heads = 2;
  long max_len = 64;
  std::uint64_t seed = 1;
  bool no_slot_label_attn = false;
  bool no_intent_label_attn = false;
  bool no_dep_encoder = false;
};

/// The joint network: encoder → dependency GAT → intent head with label
/// attention → intent-gated fusion → BIO tagger → span typer.
class Model {
 public:
  /// Fresh initialization; builds the frozen label description embeddings
  /// from the just-initialized encoder.
  Model(ModelConfig cfg, corpus::LabelVocab labels, encoder::WordVocab words);

  /// Rebuild around parameters loaded from a checkpoint.
  Model(ModelConfig cfg, corpus::LabelVocab labels, encoder::WordVocab words,
        ad::ParamStore&& params);

  struct Forward {
    ad::Var h;             // (N_w+2)×d raw language features
    ad::Var g;             // (N_w+2)×d_g syntactic-enhanced features
    ad::Var intent_probs;  // 1×|I|
    ad::Var h_intent;      // context fed into the gate
    ad::Var bio_dists;     // (N_w+2)×3
  };

  Forward forward(ad::Tape& tape, const corpus::Utterance& utt,
                  const depgraph::AdjacencyMatrix& adj, bool train = false,
                  ad::Rng* dropout_rng = nullptr) const;

  struct SampleLosses {
    ad::Var intent;
    ad::Var slot1;
    ad::Var slot2;
  };

  /// Per-sample loss terms; span typing is teacher-forced on gold spans.
  SampleLosses losses(ad::Tape& tape, const Forward& fwd,
                      const corpus::Sample& sample) const;

  /// Eval-mode inference: greedy BIO decoding, then typing of the decoded
  /// spans (zero spans stay zero spans).
  decode_eval::Prediction predict(const corpus::Utterance& utt,
                                  const depgraph::AdjacencyMatrix& adj) const;

  ad::ParamStore& params() { return *store_; }
  const ad::ParamStore& params() const { return *store_; }
  const ModelConfig& config() const { return cfg_; }
  const corpus::LabelVocab& labels() const { return labels_; }
  const encoder::WordVocab& words() const { return words_; }
  const encoder::Encoder& enc() const { return *encoder_; }
  const gat::Gat* dep_gat() const { return gat_.get(); }

 private:
  void attach();
  ad::Var syntactic_features(ad::Tape& tape, ad::Var h,
                             const depgraph::AdjacencyMatrix& adj, bool train,
                             ad::Rng* rng) const;
  ad::Var type_span(ad::Tape& tape, ad::Var r) const;

  ModelConfig cfg_;
  corpus::LabelVocab labels_;
  encoder::WordVocab words_;
  std::unique_ptr<ad::ParamStore> store_;
  std::unique_ptr<encoder::Encoder> encoder_;
  std::unique_ptr<gat::Gat> gat_;
  std::optional<labelsem::LabelTable> intent_table_;
  std::optional<labelsem::AttentionModule> intent_attn_;
  heads::IntentHead intent_head_;
  heads::GateModule gate_;
  heads::BioTagger bio_;
  std::optional<labelsem::LabelTable> slot_table_;
  std::optional<labelsem::AttentionModule> slot_attn_;
  heads::SpanTyper typer_;
};

}  // namespace slotgraph::model
