#include "slotgraph/encoder.hpp"

#include <cmath>

namespace slotgraph::encoder {

using ad::Mat;
using ad::Var;

void EncoderConfig::validate() const {
  if (d <= 0 || vocab_size <= 0 || n_heads <= 0 || max_len <= 0 ||
      n_layers < 0) {
    throw std::invalid_argument("encoder config values must be positive");
  }
  if (d % n_heads != 0) {
    throw std::invalid_argument("encoder d must be divisible by n_heads");
  }
}

WordVocab WordVocab::build(const corpus::Dataset& train) {
  WordVocab v;
  v.words_ = {"<bos>", "<eos>", "<unk>"};
  for (std::size_t i = 0; i < v.words_.size(); ++i) {
    v.ids_[v.words_[i]] = static_cast<int>(i);
  }
  for (const auto& s : train.samples) {
    for (const auto& tok : s.utterance.tokens) {
      if (!v.ids_.count(tok)) {
        v.ids_[tok] = static_cast<int>(v.words_.size());
        v.words_.push_back(tok);
      }
    }
  }
  return v;
}

int WordVocab::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnk : it->second;
}

void WordVocab::set_words(std::vector<std::string> words) {
  words_ = std::move(words);
  ids_.clear();
  for (std::size_t i = 0; i < words_.size(); ++i) {
    ids_[words_[i]] = static_cast<int>(i);
  }
}

namespace {

std::string lname(long layer, const std::string& suffix) {
  return "enc.L" + std::to_string(layer) + "." + suffix;
}

}  // namespace

Encoder::Encoder(EncoderConfig cfg, ad::ParamStore& store, ad::Rng& rng)
    : cfg_(cfg), store_(&store) {
  cfg_.validate();
  long d = cfg_.d;
  store.add("enc.word_emb", rng.uniform_mat(cfg_.vocab_size, d, -0.1, 0.1));
  for (long l = 0; l < cfg_.n_layers; ++l) {
    store.add(lname(l, "ln1.g"), Mat::Ones(1, d));
    store.add(lname(l, "ln1.b"), Mat::Zero(1, d));
    for (const char* w : {"wq", "wk", "wv", "wo"}) {
      store.add(lname(l, w), rng.xavier(d, d));
    }
    for (const char* b : {"bq", "bk", "bv", "bo"}) {
      store.add(lname(l, b), Mat::Zero(1, d));
    }
    store.add(lname(l, "ln2.g"), Mat::Ones(1, d));
    store.add(lname(l, "ln2.b"), Mat::Zero(1, d));
    store.add(lname(l, "ffn.w1"), rng.xavier(cfg_.d_ff(), d));
    store.add(lname(l, "ffn.b1"), Mat::Zero(1, cfg_.d_ff()));
    store.add(lname(l, "ffn.w2"), rng.xavier(d, cfg_.d_ff()));
    store.add(lname(l, "ffn.b2"), Mat::Zero(1, d));
  }
}

Encoder::Encoder(EncoderConfig cfg, ad::ParamStore& store)
    : cfg_(cfg), store_(&store) {
  cfg_.validate();
  store.at("enc.word_emb");  // existence check
}

Eigen::MatrixXd Encoder::positional(long n, long d) {
  Mat p(n, d);
  for (long pos = 0; pos < n; ++pos) {
    for (long i = 0; i < d; ++i) {
      double angle =
          static_cast<double>(pos) /
          std::pow(10000.0, 2.0 * static_cast<double>(i / 2) /
                                static_cast<double>(d));
      p(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return p;
}

Var Encoder::encode_ids(ad::Tape& tape, const std::vector<int>& word_ids) const {
  long n = static_cast<long>(word_ids.size()) + 2;
  if (n > cfg_.max_len) throw TooLong(n, cfg_.max_len);
  std::vector<long> idx;
  idx.reserve(n);
  idx.push_back(WordVocab::kBos);
  for (int w : word_ids) idx.push_back(w);
  idx.push_back(WordVocab::kEos);

  Var emb_table = tape.leaf(store_->at("enc.word_emb"));
  Var x = ad::add(ad::gather_rows(emb_table, idx),
                  tape.constant(positional(n, cfg_.d)));

  long dh = cfg_.d / cfg_.n_heads;
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (long l = 0; l < cfg_.n_layers; ++l) {
    auto P = [&](const std::string& s) -> Var {
      return tape.leaf(store_->at(lname(l, s)));
    };
    Var h1 = ad::layernorm_rows(x, P("ln1.g"), P("ln1.b"));
    Var q = ad::linear(h1, P("wq"), P("bq"));
    Var k = ad::linear(h1, P("wk"), P("bk"));
    Var v = ad::linear(h1, P("wv"), P("bv"));
    Var heads;
    for (long hIdx = 0; hIdx < cfg_.n_heads; ++hIdx) {
      Var qk = ad::cols(q, hIdx * dh, dh);
      Var kk = ad::cols(k, hIdx * dh, dh);
      Var vk = ad::cols(v, hIdx * dh, dh);
      Var scores = ad::scale(ad::matmul(qk, ad::transpose(kk)), scale);
      Var attn = ad::softmax_rows(scores);
      Var out = ad::matmul(attn, vk);
      heads = hIdx == 0 ? out : ad::concat_cols(heads, out);
    }
    x = ad::add(x, ad::linear(heads, P("wo"), P("bo")));
    Var h2 = ad::layernorm_rows(x, P("ln2.g"), P("ln2.b"));
    Var f = ad::linear(ad::gelu(ad::linear(h2, P("ffn.w1"), P("ffn.b1"))),
                       P("ffn.w2"), P("ffn.b2"));
    x = ad::add(x, f);
  }
  return x;
}

Var Encoder::encode(ad::Tape& tape, const corpus::Utterance& utt,
                    const WordVocab& vocab) const {
  std::vector<int> ids;
  ids.reserve(utt.tokens.size());
  for (const auto& tok : utt.tokens) ids.push_back(vocab.id(tok));
  return encode_ids(tape, ids);
}

Eigen::MatrixXd Encoder::embed_description(const std::string& description,
                                           const WordVocab& vocab) const {
  auto toks = corpus::split_ws(description);
  if (toks.empty()) throw EmptyDescription();
  std::vector<int> ids;
  ids.reserve(toks.size());
  for (const auto& t : toks) ids.push_back(vocab.id(t));

  ad::Tape tape;
  Var h = encode_ids(tape, ids);
  Var pooled = ad::mean_of_rows(
      ad::rows(h, 1, static_cast<long>(ids.size())));
  return pooled.val();
}

}  // namespace slotgraph::encoder
