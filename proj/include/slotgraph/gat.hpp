#pragma once

#include "slotgraph/autodiff.hpp"
#include "slotgraph/depgraph.hpp"

#include <vector>

namespace slotgraph::gat {

struct GatConfig {
  long k_heads = 2;
  long d_in = 32;
  long d_out_total = 32;
  double dropout_rate = 0.0;
  long n_layers = 1;
  std::uint64_t seed = 7;

  long d_head() const { return d_out_total / k_heads; }
  void validate() const;
};

/// Multi-head graph attention over a fixed neighbor structure.
/// Per head: scores LeakyReLU(aᵀ[Wh_i ∥ Wh_j]) softmax-normalized over the
/// neighborhood of i, aggregation through ELU, heads concatenated.
class Gat {
 public:
  Gat(GatConfig cfg, ad::ParamStore& store, ad::Rng& rng);
  Gat(GatConfig cfg, ad::ParamStore& store);

  /// h: (n×d_in) features, n matching the adjacency side length.
  /// In train mode, dropout (from `rng`) is applied to the layer input and
  /// to the normalized attention coefficients.
  ad::Var forward(ad::Tape& tape, ad::Var h,
                  const depgraph::AdjacencyMatrix& adj, bool train = false,
                  ad::Rng* rng = nullptr) const;

  /// First-layer attention coefficients per head, eval mode.
  /// Entries outside the neighborhood are exactly zero.
  std::vector<Eigen::MatrixXd> attention_coeffs(
      const Eigen::MatrixXd& h, const depgraph::AdjacencyMatrix& adj) const;

  static constexpr double kLeakySlope = 0.2;

  const GatConfig& config() const { return cfg_; }

 private:
  ad::Var layer_forward(ad::Tape& tape, ad::Var x,
                        const depgraph::AdjacencyMatrix& adj, long layer,
                        bool train, ad::Rng* rng) const;

  GatConfig cfg_;
  ad::ParamStore* store_;
};

}  // namespace slotgraph::gat
