#include "slotgraph/gradsuites.hpp"

#include "slotgraph/model.hpp"
#include "slotgraph/trainer.hpp"

namespace slotgraph::gradsuites {

using ad::Mat;
using ad::Var;

namespace {

corpus::Dataset micro_dataset() {
  corpus::Dataset ds;
  auto add = [&](std::vector<std::string> toks, int intent,
                 std::vector<corpus::Span> spans) {
    corpus::Sample s;
    s.utterance.tokens = std::move(toks);
    s.intent.intent = intent;
    s.slots.spans = std::move(spans);
    s.slots.bio = corpus::spans_to_bio(
        s.slots.spans, static_cast<int>(s.utterance.tokens.size()));
    ds.samples.push_back(std::move(s));
  };
  add({"book", "flight", "to", "boston"}, 0, {{4, 4, 0}});
  add({"play", "music", "by", "drake"}, 1, {{4, 4, 1}});
  return ds;
}

corpus::LabelVocab micro_labels() {
  corpus::LabelVocab lv;
  lv.intent_names = {"book_flight", "play_music"};
  lv.slot_type_names = {"city", "artist"};
  return lv;
}

/// Shared squared-distance objective against a fixed target.
Var sq_to(Var x, const Mat& target, ad::Tape& t) {
  Var diff = ad::sub(x, t.constant(target));
  return ad::sum_all(ad::cmul(diff, diff));
}

GradCheckReport check_encoder(std::uint64_t seed, double tol,
                              std::size_t cap) {
  auto ds = micro_dataset();
  auto vocab = encoder::WordVocab::build(ds);
  encoder::EncoderConfig cfg;
  cfg.d = 8;
  cfg.vocab_size = vocab.size();
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.seed = seed;
  ad::ParamStore ps;
  ad::Rng rng(seed);
  encoder::Encoder enc(cfg, ps, rng);
  Mat target = rng.uniform_mat(6, 8, -1.0, 1.0);
  auto loss = [&](bool g) {
    ad::Tape t;
    Var s = sq_to(enc.encode(t, ds.samples[0].utterance, vocab), target, t);
    if (g) t.backward(s);
    return s.scalar();
  };
  return gradcheck(ps, loss, "encoder", tol, 1e-5, cap, seed);
}

GradCheckReport check_gat(std::uint64_t seed, double tol, std::size_t cap) {
  gat::GatConfig cfg;
  cfg.k_heads = 2;
  cfg.d_in = 4;
  cfg.d_out_total = 4;
  ad::ParamStore ps;
  ad::Rng rng(seed);
  gat::Gat g(cfg, ps, rng);
  ps.add("input_h", rng.uniform_mat(4, 4, -1.0, 1.0));
  Mat a = Mat::Identity(4, 4);
  a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = a(1, 3) = a(3, 1) = 1.0;
  depgraph::AdjacencyMatrix adj{a};
  Mat target = rng.uniform_mat(4, 4, -1.0, 1.0);
  auto loss = [&](bool grad) {
    ad::Tape t;
    Var s = sq_to(g.forward(t, t.leaf(ps.at("input_h")), adj), target, t);
    if (grad) t.backward(s);
    return s.scalar();
  };
  return gradcheck(ps, loss, "gat", tol, 1e-5, cap, seed);
}

struct LabelFixture {
  ad::ParamStore ps;
  labelsem::LabelTable table;
  labelsem::AttentionModule attn;

  LabelFixture(long n, long d, long dq, std::uint64_t seed) {
    ad::Rng rng(seed);
    table.desc_part = &ps.add("table.desc", rng.uniform_mat(n, d, -1, 1), false);
    table.global_part = &ps.add("table.global", rng.uniform_mat(n, d, -0.1, 0.1));
    table.n_labels = n;
    table.d = d;
    attn = labelsem::build_attention("attn", d, dq, ps, rng);
  }
};

GradCheckReport check_label_attention(std::uint64_t seed, double tol,
                                      std::size_t cap) {
  LabelFixture f(3, 4, 3, seed);
  ad::Rng rng(seed + 1);
  f.ps.add("query", rng.uniform_mat(1, 3, -1.0, 1.0));
  Mat target = rng.uniform_mat(1, 4, -1.0, 1.0);
  auto loss = [&](bool g) {
    ad::Tape t;
    auto out = labelsem::label_attention(t.leaf(f.ps.at("query")),
                                         f.table.combined(t), f.attn, t);
    Var s = sq_to(out.context, target, t);
    if (g) t.backward(s);
    return s.scalar();
  };
  return gradcheck(f.ps, loss, "label_attention", tol, 1e-5, cap, seed);
}

GradCheckReport check_intent_head(std::uint64_t seed, double tol,
                                  std::size_t cap) {
  LabelFixture f(3, 4, 4, seed);
  ad::Rng rng(seed + 2);
  heads::IntentHead head = heads::build_intent_head(3, 4 + 4, f.ps, rng);
  f.ps.add("g0", rng.uniform_mat(1, 4, -1.0, 1.0));
  auto loss = [&](bool g) {
    ad::Tape t;
    auto out = heads::intent_forward(t, t.leaf(f.ps.at("g0")), f.table, f.attn,
                                     head);
    Var s = heads::intent_loss(out.probs, 1);
    if (g) t.backward(s);
    return s.scalar();
  };
  return gradcheck(f.ps, loss, "intent_head", tol, 1e-5, cap, seed);
}

GradCheckReport check_gate_fusion(std::uint64_t seed, double tol,
                                  std::size_t cap) {
  ad::ParamStore ps;
  ad::Rng rng(seed);
  heads::GateModule gate = heads::build_gate(3, 4, ps, rng);
  ps.add("h_intent", rng.uniform_mat(1, 3, -1.0, 1.0));
  ps.add("g", rng.uniform_mat(5, 4, -1.0, 1.0));
  ps.add("h", rng.uniform_mat(5, 3, -1.0, 1.0));
  Mat target = rng.uniform_mat(5, 7, -1.0, 1.0);
  auto loss = [&](bool g) {
    ad::Tape t;
    Var fused = heads::gate_fuse(t, t.leaf(ps.at("h_intent")),
                                 t.leaf(ps.at("g")), t.leaf(ps.at("h")), gate);
    Var s = sq_to(fused, target, t);
    if (g) t.backward(s);
    return s.scalar();
  };
  return gradcheck(ps, loss, "gate_fusion", tol, 1e-5, cap, seed);
}

GradCheckReport check_bio_tagger(std::uint64_t seed, double tol,
                                 std::size_t cap) {
  ad::ParamStore ps;
  ad::Rng rng(seed);
  heads::BioTagger tagger = heads::build_bio_tagger(6, ps, rng);
  ps.add("fused", rng.uniform_mat(5, 6, -1.0, 1.0));  // 3 words + placeholders
  std::vector<corpus::Bio> gold = {corpus::Bio::O, corpus::Bio::B,
                                   corpus::Bio::I};
  auto loss = [&](bool g) {
    ad::Tape t;
    Var dists = heads::bio_forward(t.leaf(ps.at("fused")), tagger, t);
    Var s = heads::bio_loss(dists, gold, t);
    if (g) t.backward(s);
    return s.scalar();
  };
  return gradcheck(ps, loss, "bio_tagger", tol, 1e-5, cap, seed);
}

GradCheckReport check_span_typer(std::uint64_t seed, double tol,
                                 std::size_t cap) {
  LabelFixture f(2, 4, 4, seed);
  ad::Rng rng(seed + 3);
  heads::SpanTyper typer = heads::build_span_typer(2, 4, f.ps, rng);
  f.ps.add("h", rng.uniform_mat(5, 4, -1.0, 1.0));
  auto loss = [&](bool g) {
    ad::Tape t;
    Var r = heads::span_repr(t.leaf(f.ps.at("h")), 2, 3);
    Var d = heads::slot_type_forward(t, r, f.table, f.attn, typer);
    Var s = heads::slot_type_loss({d}, {1}, t);
    if (g) t.backward(s);
    return s.scalar();
  };
  return gradcheck(f.ps, loss, "span_typer", tol, 1e-5, cap, seed);
}

GradCheckReport check_joint(std::uint64_t seed, double tol, std::size_t cap) {
  auto ds = micro_dataset();
  model::ModelConfig cfg;
  cfg.d = 8;
  cfg.d_g = 8;
  cfg.gat_heads = 2;
  cfg.enc_layers = 1;
  cfg.enc_heads = 2;
  cfg.seed = seed;
  model::Model m(cfg, micro_labels(), encoder::WordVocab::build(ds));
  std::vector<depgraph::DepParse> parses(2, depgraph::DepParse{{0, 1, 4, 2}});
  auto adj = trainer::adjacencies(parses);
  double gamma = 0.5;
  auto loss = [&](bool g) {
    ad::Tape t;
    Var total;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      auto fwd = m.forward(t, ds.samples[i].utterance, adj[i]);
      auto ls = m.losses(t, fwd, ds.samples[i]);
      Var joint = ad::add(ad::scale(ad::add(ls.slot1, ls.slot2), 1 - gamma),
                          ad::scale(ls.intent, gamma));
      total = total ? ad::add(total, joint) : joint;
    }
    total = ad::scale(total, 1.0 / static_cast<double>(ds.samples.size()));
    if (g) t.backward(total);
    return total.scalar();
  };
  return gradcheck(m.params(), loss, "joint_loss", tol, 1e-5, cap, seed);
}

}  // namespace

std::vector<GradCheckReport> run_all(std::uint64_t seed, double tol,
                                     std::size_t max_entries_per_param) {
  return {
      check_encoder(seed, tol, max_entries_per_param),
      check_gat(seed, tol, max_entries_per_param),
      check_label_attention(seed, tol, max_entries_per_param),
      check_intent_head(seed, tol, max_entries_per_param),
      check_gate_fusion(seed, tol, max_entries_per_param),
      check_bio_tagger(seed, tol, max_entries_per_param),
      check_span_typer(seed, tol, max_entries_per_param),
      check_joint(seed, tol, max_entries_per_param),
  };
}

bool detects_corrupted_gradient(std::uint64_t seed) {
  ad::ParamStore ps;
  ad::Rng rng(seed);
  ps.add("w", rng.uniform_mat(2, 2, -1.0, 1.0));
  auto loss = [&](bool g) {
    ad::Tape t;
    Var w = t.leaf(ps.at("w"));
    Var s = ad::sum_all(ad::cmul(w, w));
    if (g) {
      t.backward(s);
      ps.at("w").grad.array() += 0.5;  // deliberate corruption
    }
    return s.scalar();
  };
  auto rep = gradcheck(ps, loss, "corrupted");
  return !rep.pass;
}

}  // namespace slotgraph::gradsuites
