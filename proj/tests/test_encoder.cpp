#include <doctest.h>

#include "slotgraph/encoder.hpp"
#include "slotgraph/gradcheck.hpp"

using namespace slotgraph;
using namespace slotgraph::encoder;
using ad::Mat;
using ad::Var;

namespace {

corpus::Dataset tiny_dataset() {
  corpus::Dataset ds;
  corpus::Sample s;
  s.utterance.tokens = {"book", "a", "flight"};
  s.slots.bio.assign(3, corpus::Bio::O);
  ds.samples.push_back(s);
  return ds;
}

}  // namespace

TEST_CASE("encode output shape and determinism") {
  auto ds = tiny_dataset();
  auto vocab = WordVocab::build(ds);
  EncoderConfig cfg;
  cfg.d = 8;
  cfg.vocab_size = vocab.size();
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.seed = 11;
  ad::ParamStore ps;
  ad::Rng rng(cfg.seed);
  Encoder enc(cfg, ps, rng);

  ad::Tape t1, t2;
  Var h1 = enc.encode(t1, ds.samples[0].utterance, vocab);
  Var h2 = enc.encode(t2, ds.samples[0].utterance, vocab);
  CHECK(h1.rows() == 5);  // N_w + 2
  CHECK(h1.cols() == 8);
  CHECK(h1.val() == h2.val());  // pure function of (params, input)
  CHECK(h1.val().allFinite());
}

TEST_CASE("n_layers=0 with zero embeddings reduces to positional rows") {
  auto ds = tiny_dataset();
  auto vocab = WordVocab::build(ds);
  EncoderConfig cfg;
  cfg.d = 6;
  cfg.vocab_size = vocab.size();
  cfg.n_layers = 0;
  cfg.n_heads = 2;
  ad::ParamStore ps;
  ad::Rng rng(1);
  Encoder enc(cfg, ps, rng);
  ps.at("enc.word_emb").value.setZero();

  ad::Tape t;
  Var h = enc.encode(t, ds.samples[0].utterance, vocab);
  Mat pos = Encoder::positional(5, 6);
  CHECK((h.val() - pos).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encode rejects sequences beyond max_len") {
  auto ds = tiny_dataset();
  auto vocab = WordVocab::build(ds);
  EncoderConfig cfg;
  cfg.d = 4;
  cfg.vocab_size = vocab.size();
  cfg.n_layers = 0;
  cfg.n_heads = 1;
  cfg.max_len = 4;
  ad::ParamStore ps;
  ad::Rng rng(1);
  Encoder enc(cfg, ps, rng);
  ad::Tape t;
  CHECK_THROWS_AS(enc.encode(t, ds.samples[0].utterance, vocab), TooLong);
}

TEST_CASE("embed_description pooling") {
  auto ds = tiny_dataset();
  auto vocab = WordVocab::build(ds);
  EncoderConfig cfg;
  cfg.d = 6;
  cfg.vocab_size = vocab.size();
  cfg.n_layers = 0;
  cfg.n_heads = 2;
  ad::ParamStore ps;
  ad::Rng rng(5);
  Encoder enc(cfg, ps, rng);

  CHECK_THROWS_AS(enc.embed_description("", vocab), EmptyDescription);
  CHECK(enc.embed_description("flight", vocab).cols() == 6);

  // single token: pooled vector equals that token's feature row
  ad::Tape t;
  corpus::Utterance u;
  u.tokens = {"flight"};
  Var h = enc.encode(t, u, vocab);
  Mat d = enc.embed_description("flight", vocab);
  CHECK((d - h.val().row(1)).cwiseAbs().maxCoeff() == 0.0);

  // two tokens, n_layers = 0: average of the two embedding+position rows
  const Mat& emb = ps.at("enc.word_emb").value;
  Mat pos = Encoder::positional(4, 6);
  Mat expect =
      ((emb.row(vocab.id("book")) + pos.row(1)) +
       (emb.row(vocab.id("a")) + pos.row(2))) /
      2.0;
  Mat got = enc.embed_description("book a", vocab);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-14);

  // unknown description words fall back to the UNK row
  Mat unk = enc.embed_description("zzz", vocab);
  Mat expect_unk = emb.row(WordVocab::kUnk) + pos.row(1);
  CHECK((unk - expect_unk).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("encoder gradients match finite differences") {
  auto ds = tiny_dataset();
  auto vocab = WordVocab::build(ds);
  EncoderConfig cfg;
  cfg.d = 8;
  cfg.vocab_size = vocab.size();
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.seed = 21;
  ad::ParamStore ps;
  ad::Rng rng(cfg.seed);
  Encoder enc(cfg, ps, rng);

  ad::Rng probe(77);
  Mat target = probe.uniform_mat(5, 8, -1.0, 1.0);
  auto loss = [&](bool with_grad) {
    ad::Tape t;
    Var h = enc.encode(t, ds.samples[0].utterance, vocab);
    Var diff = ad::sub(h, t.constant(target));
    Var s = ad::sum_all(ad::cmul(diff, diff));
    if (with_grad) t.backward(s);
    return s.scalar();
  };
  auto rep = gradcheck(ps, loss, "encoder", 1e-4, 1e-5, 40, 5);
  CHECK_MESSAGE(rep.pass, rep.worst_at, " err=", rep.worst_rel_err);
}
