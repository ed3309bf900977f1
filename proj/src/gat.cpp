#include "slotgraph/gat.hpp"

#include <cmath>

namespace slotgraph::gat {

using ad::Mat;
using ad::Var;

void GatConfig::validate() const {
  if (k_heads <= 0 || d_in <= 0 || d_out_total <= 0 || n_layers <= 0) {
    throw std::invalid_argument("gat config values must be positive");
  }
  if (d_out_total % k_heads != 0) {
    throw std::invalid_argument("gat d_out_total must be divisible by k_heads");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("gat dropout_rate must be in [0,1)");
  }
}

namespace {

std::string pname(long layer, long head, const char* suffix) {
  return "gat.L" + std::to_string(layer) + ".h" + std::to_string(head) + "." +
         suffix;
}

}  // namespace

Gat::Gat(GatConfig cfg, ad::ParamStore& store, ad::Rng& rng)
    : cfg_(cfg), store_(&store) {
  cfg_.validate();
  long dh = cfg_.d_head();
  for (long l = 0; l < cfg_.n_layers; ++l) {
    long din = l == 0 ? cfg_.d_in : cfg_.d_out_total;
    for (long k = 0; k < cfg_.k_heads; ++k) {
      store.add(pname(l, k, "w"), rng.xavier(dh, din));
      store.add(pname(l, k, "a"), rng.xavier(1, 2 * dh));
    }
  }
}

Gat::Gat(GatConfig cfg, ad::ParamStore& store) : cfg_(cfg), store_(&store) {
  cfg_.validate();
  store.at(pname(0, 0, "w"));
}

Var Gat::layer_forward(ad::Tape& tape, ad::Var x,
                       const depgraph::AdjacencyMatrix& adj, long layer,
                       bool train, ad::Rng* rng) const {
  long n = x.rows();
  if (n != adj.size()) {
    throw ad::DimensionMismatch("gat feature rows vs adjacency size");
  }
  if (train && rng && cfg_.dropout_rate > 0.0) {
    x = ad::cmul(x, tape.constant(
        rng->dropout_mask(n, x.cols(), cfg_.dropout_rate)));
  }
  long dh = cfg_.d_head();
  Var out;
  for (long k = 0; k < cfg_.k_heads; ++k) {
    Var w = tape.leaf(store_->at(pname(layer, k, "w")));
    Var a = tape.leaf(store_->at(pname(layer, k, "a")));
    Var z = ad::matmul(x, ad::transpose(w));  // n×dh
    Var a_src = ad::cols(a, 0, dh);
    Var a_dst = ad::cols(a, dh, dh);
    Var u = ad::matmul(z, ad::transpose(a_src));  // n×1, aᵀ(Wh_i) part
    Var v = ad::matmul(z, ad::transpose(a_dst));  // n×1, aᵀ(Wh_j) part
    Var scores = ad::add(ad::broadcast_col(u, n),
                         ad::broadcast_row(ad::transpose(v), n));
    scores = ad::leaky_relu(scores, kLeakySlope);
    Var alpha = ad::masked_softmax_rows(scores, adj.a);
    if (train && rng && cfg_.dropout_rate > 0.0) {
      alpha = ad::cmul(alpha, tape.constant(
          rng->dropout_mask(n, n, cfg_.dropout_rate)));
    }
    Var head = ad::elu(ad::matmul(alpha, z));
    out = k == 0 ? head : ad::concat_cols(out, head);
  }
  return out;
}

Var Gat::forward(ad::Tape& tape, ad::Var h,
                 const depgraph::AdjacencyMatrix& adj, bool train,
                 ad::Rng* rng) const {
  if (h.cols() != cfg_.d_in) {
    throw ad::DimensionMismatch("gat input dim");
  }
  Var x = h;
  for (long l = 0; l < cfg_.n_layers; ++l) {
    x = layer_forward(tape, x, adj, l, train, rng);
  }
  return x;
}

std::vector<Eigen::MatrixXd> Gat::attention_coeffs(
    const Eigen::MatrixXd& h, const depgraph::AdjacencyMatrix& adj) const {
  if (h.cols() != cfg_.d_in || h.rows() != adj.size()) {
    throw ad::DimensionMismatch("gat attention_coeffs input");
  }
  std::vector<Mat> out;
  ad::Tape tape;
  Var x = tape.constant(h);
  long n = h.rows();
  long dh = cfg_.d_head();
  for (long k = 0; k < cfg_.k_heads; ++k) {
    Var w = tape.leaf(store_->at(pname(0, k, "w")));
    Var a = tape.leaf(store_->at(pname(0, k, "a")));
    Var z = ad::matmul(x, ad::transpose(w));
    Var u = ad::matmul(z, ad::transpose(ad::cols(a, 0, dh)));
    Var v = ad::matmul(z, ad::transpose(ad::cols(a, dh, dh)));
    Var scores = ad::leaky_relu(
        ad::add(ad::broadcast_col(u, n),
                ad::broadcast_row(ad::transpose(v), n)),
        kLeakySlope);
    out.push_back(ad::masked_softmax_rows(scores, adj.a).val());
  }
  return out;
}

}  // namespace slotgraph::gat
