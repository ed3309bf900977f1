#include "slotgraph/model.hpp"

namespace slotgraph::model {

using ad::Mat;
using ad::Var;

namespace {

encoder::EncoderConfig enc_config(const ModelConfig& cfg, long vocab_size) {
  encoder::EncoderConfig e;
  e.d = cfg.d;
  e.vocab_size = vocab_size;
  e.n_layers = cfg.enc_layers;
  e.n_heads = cfg.enc_heads;
  e.max_len = cfg.max_len;
  e.seed = cfg.seed;
  return e;
}

gat::GatConfig gat_config(const ModelConfig& cfg) {
  gat::GatConfig g;
  g.k_heads = cfg.gat_heads;
  g.d_in = cfg.d;
  g.d_out_total = cfg.d_g;
  g.dropout_rate = cfg.gat_dropout;
  g.n_layers = cfg.gat_layers;
  g.seed = cfg.seed;
  return g;
}

}  // namespace

Model::Model(ModelConfig cfg, corpus::LabelVocab labels,
             encoder::WordVocab words)
    : cfg_(cfg),
      labels_(std::move(labels)),
      words_(std::move(words)),
      store_(std::make_unique<ad::ParamStore>()) {
  ad::Rng rng(cfg_.seed);
  encoder_ = std::make_unique<encoder::Encoder>(
      enc_config(cfg_, words_.size()), *store_, rng);

  if (cfg_.no_dep_encoder) {
    // fixed seeded projection H → d_g in place of the GAT
    store_->add("noenc.proj", rng.xavier(cfg_.d_g, cfg_.d), false);
  } else {
    gat_ = std::make_unique<gat::Gat>(gat_config(cfg_), *store_, rng);
  }

  long n_intents = static_cast<long>(labels_.intent_names.size());
  long n_types = static_cast<long>(labels_.slot_type_names.size());

  if (cfg_.no_intent_label_attn) {
    intent_head_ = heads::build_intent_head(n_intents, cfg_.d, *store_, rng);
  } else {
    intent_table_ = labelsem::build_table("intent_table", labels_.intent_names,
                                          labels_, *encoder_, words_, *store_,
                                          rng);
    intent_attn_ =
        labelsem::build_attention("intent_attn", cfg_.d, cfg_.d_g, *store_, rng);
    intent_head_ =
        heads::build_intent_head(n_intents, cfg_.d + cfg_.d_g, *store_, rng);
  }

  gate_ = heads::build_gate(cfg_.d, cfg_.d_g, *store_, rng);
  bio_ = heads::build_bio_tagger(cfg_.d_g + cfg_.d, *store_, rng);

  if (!cfg_.no_slot_label_attn) {
    slot_table_ = labelsem::build_table("slot_table", labels_.slot_type_names,
                                        labels_, *encoder_, words_, *store_,
                                        rng);
    slot_attn_ =
        labelsem::build_attention("slot_attn", cfg_.d, cfg_.d, *store_, rng);
  }
  typer_ = heads::build_span_typer(n_types, cfg_.d, *store_, rng);
}

Model::Model(ModelConfig cfg, corpus::LabelVocab labels,
             encoder::WordVocab words, ad::ParamStore&& params)
    : cfg_(cfg),
      labels_(std::move(labels)),
      words_(std::move(words)),
      store_(std::make_unique<ad::ParamStore>(std::move(params))) {
  attach();
}

void Model::attach() {
  encoder_ = std::make_unique<encoder::Encoder>(
      enc_config(cfg_, words_.size()), *store_);
  if (!cfg_.no_dep_encoder) {
    gat_ = std::make_unique<gat::Gat>(gat_config(cfg_), *store_);
  } else {
    store_->at("noenc.proj");
  }
  if (!cfg_.no_intent_label_attn) {
    intent_table_ = labelsem::attach_table("intent_table", *store_);
    intent_attn_ = labelsem::attach_attention("intent_attn", *store_);
  }
  intent_head_ = heads::attach_intent_head(*store_);
  gate_ = heads::attach_gate(*store_);
  bio_ = heads::attach_bio_tagger(*store_);
  if (!cfg_.no_slot_label_attn) {
    slot_table_ = labelsem::attach_table("slot_table", *store_);
    slot_attn_ = labelsem::attach_attention("slot_attn", *store_);
  }
  typer_ = heads::attach_span_typer(*store_);
}

Var Model::syntactic_features(ad::Tape& tape, Var h,
                              const depgraph::AdjacencyMatrix& adj, bool train,
                              ad::Rng* rng) const {
  if (cfg_.no_dep_encoder) {
    return ad::matmul(h, ad::transpose(tape.leaf(store_->at("noenc.proj"))));
  }
  return gat_->forward(tape, h, adj, train, rng);
}

Model::Forward Model::forward(ad::Tape& tape, const corpus::Utterance& utt,
                              const depgraph::AdjacencyMatrix& adj, bool train,
                              ad::Rng* dropout_rng) const {
  Forward f;
  f.h = encoder_->encode(tape, utt, words_);
  f.g = syntactic_features(tape, f.h, adj, train, dropout_rng);

  if (cfg_.no_intent_label_attn) {
    f.h_intent = ad::row(f.h, 0);
    f.intent_probs = ad::softmax_rows(ad::linear(
        f.h_intent, tape.leaf(*intent_head_.w), tape.leaf(*intent_head_.b)));
  } else {
    Var g0 = ad::row(f.g, 0);
    auto out = heads::intent_forward(tape, g0, *intent_table_, *intent_attn_,
                                     intent_head_);
    f.intent_probs = out.probs;
    f.h_intent = out.h_intent;
  }

  Var fused = heads::gate_fuse(tape, f.h_intent, f.g, f.h, gate_);
  f.bio_dists = heads::bio_forward(fused, bio_, tape);
  return f;
}

Var Model::type_span(ad::Tape& tape, Var r) const {
  if (cfg_.no_slot_label_attn) {
    return heads::slot_type_forward_direct(tape, r, typer_);
  }
  return heads::slot_type_forward(tape, r, *slot_table_, *slot_attn_, typer_);
}

Model::SampleLosses Model::losses(ad::Tape& tape, const Forward& fwd,
                                  const corpus::Sample& sample) const {
  SampleLosses out;
  out.intent = heads::intent_loss(fwd.intent_probs, sample.intent.intent);
  out.slot1 = heads::bio_loss(fwd.bio_dists, sample.slots.bio, tape);

  std::vector<Var> dists;
  std::vector<int> gold_types;
  for (const corpus::Span& s : sample.slots.spans) {
    Var r = heads::span_repr(fwd.h, s.l, s.r);
    dists.push_back(type_span(tape, r));
    gold_types.push_back(s.type);
  }
  out.slot2 = heads::slot_type_loss(dists, gold_types, tape);
  return out;
}

decode_eval::Prediction Model::predict(
    const corpus::Utterance& utt, const depgraph::AdjacencyMatrix& adj) const {
  ad::Tape tape;
  Forward f = forward(tape, utt, adj, /*train=*/false);

  decode_eval::Prediction pred;
  const Mat& probs = f.intent_probs.val();
  long best = 0;
  for (long c = 1; c < probs.cols(); ++c) {
    if (probs(0, c) > probs(0, best)) best = c;
  }
  pred.intent = static_cast<int>(best);

  long n_words = static_cast<long>(utt.tokens.size());
  Mat word_dists = f.bio_dists.val().middleRows(1, n_words);
  for (const auto& ps : decode_eval::decode_bio(word_dists)) {
    Var r = heads::span_repr(f.h, ps.l, ps.r);
    const Mat& td = type_span(tape, r).val();
    long t = 0;
    for (long c = 1; c < td.cols(); ++c) {
      if (td(0, c) > td(0, t)) t = c;
    }
    pred.spans.push_back(corpus::Span{ps.l, ps.r, static_cast<int>(t)});
  }
  return pred;
}

}  // namespace slotgraph::model
