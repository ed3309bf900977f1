#include <doctest.h>

#include "slotgraph/gat.hpp"
#include "slotgraph/gradcheck.hpp"

#include <cmath>
#include <random>

using namespace slotgraph;
using namespace slotgraph::gat;
using ad::Mat;
using ad::Var;

namespace {

depgraph::AdjacencyMatrix adj_from(std::initializer_list<std::pair<int, int>> edges,
                                   long n) {
  Mat a = Mat::Identity(n, n);
  for (auto [i, j] : edges) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return depgraph::AdjacencyMatrix{a};
}

/// Plain-loop evaluation of the attention and aggregation formulas, written
/// independently of the tape implementation.
Mat reference_gat_head(const Mat& h, const Mat& a_mask, const Mat& w,
                       const Eigen::RowVectorXd& attn_vec) {
  long n = h.rows();
  long dh = w.rows();
  Mat z(n, dh);
  for (long i = 0; i < n; ++i) z.row(i) = (w * h.row(i).transpose()).transpose();
  auto leaky = [](double x) { return x > 0 ? x : 0.2 * x; };
  Mat out(n, dh);
  for (long i = 0; i < n; ++i) {
    std::vector<double> scores(n, 0.0);
    double denom = 0.0;
    double mx = -1e300;
    for (long j = 0; j < n; ++j) {
      if (a_mask(i, j) == 0) continue;
      Eigen::RowVectorXd cat(2 * dh);
      cat << z.row(i), z.row(j);
      scores[j] = leaky(cat.dot(attn_vec));
      mx = std::max(mx, scores[j]);
    }
    for (long j = 0; j < n; ++j) {
      if (a_mask(i, j) != 0) denom += std::exp(scores[j] - mx);
    }
    Eigen::RowVectorXd agg = Eigen::RowVectorXd::Zero(dh);
    for (long j = 0; j < n; ++j) {
      if (a_mask(i, j) == 0) continue;
      double alpha = std::exp(scores[j] - mx) / denom;
      agg += alpha * z.row(j);
    }
    for (long k = 0; k < dh; ++k) {
      out(i, k) = agg(k) > 0 ? agg(k) : std::expm1(agg(k));  // ELU
    }
  }
  return out;
}

}  // namespace

TEST_CASE("single node with self loop: alpha=1, g = elu(Wh)") {
  GatConfig cfg;
  cfg.k_heads = 1;
  cfg.d_in = 3;
  cfg.d_out_total = 2;
  ad::ParamStore ps;
  ad::Rng rng(4);
  Gat gat(cfg, ps, rng);

  Mat h = rng.uniform_mat(1, 3, -1.0, 1.0);
  auto adj = adj_from({}, 1);
  auto coeffs = gat.attention_coeffs(h, adj);
  REQUIRE(coeffs.size() == 1);
  CHECK(coeffs[0](0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  ad::Tape t;
  Var out = gat.forward(t, t.constant(h), adj);
  const Mat& w = ps.at("gat.L0.h0.w").value;
  Mat z = (w * h.transpose()).transpose();
  Mat expect = z.unaryExpr([](double x) { return x > 0 ? x : std::expm1(x); });
  CHECK((out.val() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identical neighbor features give uniform attention") {
  GatConfig cfg;
  cfg.k_heads = 2;
  cfg.d_in = 4;
  cfg.d_out_total = 4;
  ad::ParamStore ps;
  ad::Rng rng(9);
  Gat gat(cfg, ps, rng);

  Mat h = Mat::Ones(3, 4) * 0.37;  // all rows identical
  auto adj = adj_from({{0, 1}, {1, 2}}, 3);
  for (const Mat& alpha : gat.attention_coeffs(h, adj)) {
    CHECK(alpha(1, 0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(alpha(1, 1) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(alpha(1, 2) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(alpha(0, 2) == 0.0);
  }
}

TEST_CASE("attention rows sum to one over neighbors, zero elsewhere") {
  GatConfig cfg;
  cfg.k_heads = 2;
  cfg.d_in = 5;
  cfg.d_out_total = 6;
  ad::ParamStore ps;
  ad::Rng rng(13);
  Gat gat(cfg, ps, rng);

  Mat h = rng.uniform_mat(4, 5, -2.0, 2.0);
  auto adj = adj_from({{0, 1}, {1, 2}, {2, 3}}, 4);
  for (const Mat& alpha : gat.attention_coeffs(h, adj)) {
    for (long i = 0; i < 4; ++i) {
      CHECK(std::abs(alpha.row(i).sum() - 1.0) < 1e-9);
      for (long j = 0; j < 4; ++j) {
        if (adj.a(i, j) == 0) CHECK(alpha(i, j) == 0.0);
      }
    }
  }

  // identity adjacency -> alpha is the identity matrix
  auto self_only = adj_from({}, 4);
  for (const Mat& alpha : gat.attention_coeffs(h, self_only)) {
    CHECK((alpha - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("3-node path graph matches the independent reference") {
  GatConfig cfg;
  cfg.k_heads = 1;
  cfg.d_in = 2;
  cfg.d_out_total = 2;
  ad::ParamStore ps;
  ad::Rng rng(2);
  Gat gat(cfg, ps, rng);

  Mat w(2, 2);
  w << 0.3, -0.7, 1.1, 0.4;
  Mat a(1, 4);
  a << 0.5, -0.2, 0.9, 0.1;
  ps.at("gat.L0.h0.w").value = w;
  ps.at("gat.L0.h0.a").value = a;

  Mat h(3, 2);
  h << 1.0, 0.5, -0.4, 0.8, 0.2, -1.2;
  auto adj = adj_from({{0, 1}, {1, 2}}, 3);

  ad::Tape t;
  Var out = gat.forward(t, t.constant(h), adj);
  Mat expect = reference_gat_head(h, adj.a, w, a.row(0));
  CHECK((out.val() - expect).cwiseAbs().maxCoeff() < 1e-9);

  // random 4-node graph, multi-head, vs the same reference per head
  GatConfig cfg2;
  cfg2.k_heads = 2;
  cfg2.d_in = 3;
  cfg2.d_out_total = 4;
  ad::ParamStore ps2;
  ad::Rng rng2(17);
  Gat gat2(cfg2, ps2, rng2);
  Mat h2 = rng2.uniform_mat(4, 3, -1.0, 1.0);
  auto adj2 = adj_from({{0, 1}, {0, 2}, {2, 3}}, 4);
  ad::Tape t2;
  Mat got = gat2.forward(t2, t2.constant(h2), adj2).val();
  for (long k = 0; k < 2; ++k) {
    Mat ref = reference_gat_head(
        h2, adj2.a, ps2.at("gat.L0.h" + std::to_string(k) + ".w").value,
        ps2.at("gat.L0.h" + std::to_string(k) + ".a").value.row(0));
    CHECK((got.middleCols(2 * k, 2) - ref).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("locality: non-neighbor perturbation leaves g_i bit-identical") {
  GatConfig cfg;
  cfg.k_heads = 2;
  cfg.d_in = 4;
  cfg.d_out_total = 4;
  ad::ParamStore ps;
  ad::Rng rng(31);
  Gat gat(cfg, ps, rng);

  std::mt19937_64 gen(55);
  for (int iter = 0; iter < 30; ++iter) {
    long n = 3 + static_cast<long>(gen() % 5);
    Mat a = Mat::Identity(n, n);
    for (long i = 1; i < n; ++i) {
      long j = static_cast<long>(gen() % i);
      a(i, j) = a(j, i) = 1.0;
    }
    depgraph::AdjacencyMatrix adj{a};
    Mat h = rng.uniform_mat(n, 4, -1.0, 1.0);

    long i = static_cast<long>(gen() % n);
    long j = static_cast<long>(gen() % n);
    if (a(i, j) != 0) continue;  // need a non-neighbor pair

    ad::Tape t1;
    Mat before = gat.forward(t1, t1.constant(h), adj).val();
    Mat h2 = h;
    h2.row(j).array() += 0.5;
    ad::Tape t2;
    Mat after = gat.forward(t2, t2.constant(h2), adj).val();
    CHECK(before.row(i) == after.row(i));
  }
}

TEST_CASE("gat gradients match finite differences") {
  GatConfig cfg;
  cfg.k_heads = 2;
  cfg.d_in = 4;
  cfg.d_out_total = 4;
  ad::ParamStore ps;
  ad::Rng rng(8);
  Gat gat(cfg, ps, rng);
  ps.add("input_h", rng.uniform_mat(4, 4, -1.0, 1.0));

  auto adj = adj_from({{0, 1}, {1, 2}, {1, 3}}, 4);
  Mat target = rng.uniform_mat(4, 4, -1.0, 1.0);
  auto loss = [&](bool with_grad) {
    ad::Tape t;
    Var h = t.leaf(ps.at("input_h"));
    Var g = gat.forward(t, h, adj);
    Var diff = ad::sub(g, t.constant(target));
    Var s = ad::sum_all(ad::cmul(diff, diff));
    if (with_grad) t.backward(s);
    return s.scalar();
  };
  auto rep = gradcheck(ps, loss, "gat");
  CHECK_MESSAGE(rep.pass, rep.worst_at, " err=", rep.worst_rel_err);
}

TEST_CASE("train-mode dropout is reproducible under a fixed seed") {
  GatConfig cfg;
  cfg.k_heads = 2;
  cfg.d_in = 4;
  cfg.d_out_total = 4;
  cfg.dropout_rate = 0.4;
  ad::ParamStore ps;
  ad::Rng rng(8);
  Gat gat(cfg, ps, rng);
  Mat h = rng.uniform_mat(4, 4, -1.0, 1.0);
  auto adj = adj_from({{0, 1}, {1, 2}, {1, 3}}, 4);

  ad::Rng d1(123), d2(123), d3(321);
  ad::Tape t1, t2, t3;
  Mat o1 = gat.forward(t1, t1.constant(h), adj, true, &d1).val();
  Mat o2 = gat.forward(t2, t2.constant(h), adj, true, &d2).val();
  Mat o3 = gat.forward(t3, t3.constant(h), adj, true, &d3).val();
  CHECK(o1 == o2);
  CHECK(o1 != o3);

  // eval mode ignores dropout entirely
  ad::Tape t4, t5;
  Mat e1 = gat.forward(t4, t4.constant(h), adj).val();
  Mat e2 = gat.forward(t5, t5.constant(h), adj).val();
  CHECK(e1 == e2);
}
