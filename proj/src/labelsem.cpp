#include "slotgraph/labelsem.hpp"

namespace slotgraph::labelsem {

using ad::Mat;
using ad::Var;

Var LabelTable::combined(ad::Tape& tape) const {
  return ad::add(tape.leaf(*desc_part), tape.leaf(*global_part));
}

LabelTable build_table(const std::string& prefix,
                       const std::vector<std::string>& label_names,
                       const corpus::LabelVocab& vocab,
                       const encoder::Encoder& enc,
                       const encoder::WordVocab& words,
                       ad::ParamStore& store,
                       ad::Rng& rng) {
  long n = static_cast<long>(label_names.size());
  long d = enc.config().d;
  Mat desc(n, d);
  for (long i = 0; i < n; ++i) {
    desc.row(i) =
        enc.embed_description(vocab.description(label_names[i]), words).row(0);
  }
  LabelTable t;
  t.desc_part = &store.add(prefix + ".desc", std::move(desc), false);
  t.global_part =
      &store.add(prefix + ".global", rng.uniform_mat(n, d, -0.1, 0.1));
  t.n_labels = n;
  t.d = d;
  return t;
}

LabelTable attach_table(const std::string& prefix, ad::ParamStore& store) {
  LabelTable t;
  t.desc_part = &store.at(prefix + ".desc");
  t.global_part = &store.at(prefix + ".global");
  t.n_labels = t.desc_part->value.rows();
  t.d = t.desc_part->value.cols();
  return t;
}

AttentionModule build_attention(const std::string& prefix, long d_label,
                                long d_query, ad::ParamStore& store,
                                ad::Rng& rng) {
  AttentionModule m;
  m.proj = &store.add(prefix + ".p", rng.xavier(d_label, d_label + d_query));
  m.proj_b = &store.add(prefix + ".pb", Mat::Zero(1, d_label));
  m.w = &store.add(prefix + ".w", rng.xavier(1, d_label));
  m.b = &store.add(prefix + ".b", Mat::Zero(1, 1));
  return m;
}

AttentionModule attach_attention(const std::string& prefix,
                                 ad::ParamStore& store) {
  AttentionModule m;
  m.proj = &store.at(prefix + ".p");
  m.proj_b = &store.at(prefix + ".pb");
  m.w = &store.at(prefix + ".w");
  m.b = &store.at(prefix + ".b");
  return m;
}

LabelAttentionOut label_attention(Var query, Var table,
                                  const AttentionModule& attn,
                                  ad::Tape& tape) {
  long d = table.cols();
  long dq = query.cols();
  long n = table.rows();
  Var proj = tape.leaf(*attn.proj);
  if (proj.cols() != d + dq || query.rows() != 1) {
    throw ad::DimensionMismatch("label_attention shapes");
  }
  Var cat = ad::concat_cols(table, ad::broadcast_row(query, n));  // n×(d+dq)
  Var hidden = ad::tanh_(ad::linear(cat, proj, tape.leaf(*attn.proj_b)));
  Var label_term =
      ad::matmul(hidden, ad::transpose(tape.leaf(*attn.w)));  // n×1
  Var scores = ad::add(ad::transpose(label_term),
                       ad::broadcast_col(tape.leaf(*attn.b), n));  // 1×n
  Var weights = ad::softmax_rows(scores);
  Var context = ad::matmul(weights, table);
  return {context, weights};
}

}  // namespace slotgraph::labelsem
