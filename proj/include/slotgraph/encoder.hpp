#pragma once

#include "slotgraph/autodiff.hpp"
#include "slotgraph/corpus.hpp"

#include <map>
#include <string>
#include <vector>

namespace slotgraph::encoder {

struct EncoderConfig {
  long d = 32;
  long vocab_size = 0;
  long n_layers = 1;
  long n_heads = 2;
  long max_len = 64;
  std::uint64_t seed = 1;

  long d_ff() const { return 2 * d; }
  void validate() const;
};

struct TooLong : std::runtime_error {
  TooLong(long n, long max_len)
      : std::runtime_error("sequence of length " + std::to_string(n) +
                           " exceeds max_len " + std::to_string(max_len)) {}
};
struct EmptyDescription : std::runtime_error {
  EmptyDescription() : std::runtime_error("label description is empty") {}
};

/// Word-level vocabulary with reserved start/end placeholder and unknown ids.
class WordVocab {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kUnk = 2;

  static WordVocab build(const corpus::Dataset& train);

  int id(const std::string& word) const;
  long size() const { return static_cast<long>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }
  void set_words(std::vector<std::string> words);

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> ids_;
};

/// Reference contextual encoder: learned word embeddings, sinusoidal
/// positions, and a stack of pre-norm self-attention blocks. Any encoder
/// producing (N_w+2)×d features could be substituted behind this surface.
class Encoder {
 public:
  /// Registers parameters under "enc." in `store` and initializes them.
  Encoder(EncoderConfig cfg, ad::ParamStore& store, ad::Rng& rng);
  /// Attaches to parameters that already exist in `store` (checkpoint load).
  Encoder(EncoderConfig cfg, ad::ParamStore& store);

  /// Features for [start, w_1..w_n, end]; word_ids excludes the placeholders.
  ad::Var encode_ids(ad::Tape& tape, const std::vector<int>& word_ids) const;
  ad::Var encode(ad::Tape& tape, const corpus::Utterance& utt,
                 const WordVocab& vocab) const;

  /// Frozen description vector: mean of the word rows (placeholders
  /// excluded) of the encoded description. Plain value, no gradient.
  Eigen::MatrixXd embed_description(const std::string& description,
                                    const WordVocab& vocab) const;

  static Eigen::MatrixXd positional(long n, long d);

  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  ad::ParamStore* store_;
};

}  // namespace slotgraph::encoder
