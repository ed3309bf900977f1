#include <doctest.h>

#include "slotgraph/gradcheck.hpp"
#include "slotgraph/labelsem.hpp"

#include <cmath>

using namespace slotgraph;
using namespace slotgraph::labelsem;
using ad::Mat;
using ad::Var;

namespace {

struct Fixture {
  ad::ParamStore ps;
  LabelTable table;
  AttentionModule attn;

  Fixture(long n_labels, long d, long dq, std::uint64_t seed = 5) {
    ad::Rng rng(seed);
    table.desc_part =
        &ps.add("t.desc", rng.uniform_mat(n_labels, d, -1.0, 1.0), false);
    table.global_part =
        &ps.add("t.global", rng.uniform_mat(n_labels, d, -0.1, 0.1));
    table.n_labels = n_labels;
    table.d = d;
    attn = build_attention("t.attn", d, dq, ps, rng);
  }
};

/// Direct loop evaluation of the attention formula, independent of the
/// tape path.
std::pair<Eigen::RowVectorXd, Eigen::RowVectorXd> reference_attention(
    const Mat& table, const Eigen::RowVectorXd& query, const Mat& proj,
    const Eigen::RowVectorXd& proj_b, const Eigen::RowVectorXd& w, double b) {
  long n = table.rows(), d = table.cols();
  Eigen::RowVectorXd scores(n);
  for (long i = 0; i < n; ++i) {
    Eigen::RowVectorXd cat(d + query.size());
    cat << table.row(i), query;
    Eigen::RowVectorXd hidden =
        ((proj * cat.transpose()).transpose() + proj_b).array().tanh();
    scores(i) = hidden.dot(w) + b;
  }
  double mx = scores.maxCoeff();
  Eigen::RowVectorXd weights = (scores.array() - mx).exp();
  weights /= weights.sum();
  Eigen::RowVectorXd ctx = Eigen::RowVectorXd::Zero(d);
  for (long i = 0; i < n; ++i) ctx += weights(i) * table.row(i);
  return {ctx, weights};
}

}  // namespace

TEST_CASE("combined view is desc + global; zero global is the identity") {
  Fixture f(3, 4, 4);
  ad::Tape t;
  Mat combined = f.table.combined(t).val();
  CHECK(combined == f.table.desc_part->value + f.table.global_part->value);

  f.table.global_part->value.setZero();
  ad::Tape t2;
  CHECK(f.table.combined(t2).val() == f.table.desc_part->value);
}

TEST_CASE("identical label embeddings give uniform weights") {
  Fixture f(4, 3, 2);
  f.table.desc_part->value = Mat::Ones(4, 3) * 0.3;
  f.table.global_part->value.setZero();
  ad::Tape t;
  ad::Rng rng(1);
  Var q = t.constant(rng.uniform_mat(1, 2, -1.0, 1.0));
  auto out = label_attention(q, f.table.combined(t), f.attn, t);
  for (long i = 0; i < 4; ++i) {
    CHECK(out.weights.val()(0, i) == doctest::Approx(0.25).epsilon(1e-12));
  }
  CHECK((out.context.val() - Mat::Ones(1, 3) * 0.3).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("saturated score selects that label's embedding") {
  Fixture f(2, 2, 2);
  // give label 0 a huge score margin through the first hidden unit
  f.table.desc_part->value << 10, 0, -10, 0;
  f.table.global_part->value.setZero();
  f.attn.proj->value.setZero();
  f.attn.proj->value(0, 0) = 1.0;  // hidden_0 = tanh(e_i[0]) = ±1
  f.attn.proj_b->value.setZero();
  f.attn.w->value << 20.0, 0.0;
  f.attn.b->value.setZero();
  ad::Tape t;
  Var q = t.constant(Mat::Zero(1, 2));
  auto out = label_attention(q, f.table.combined(t), f.attn, t);
  CHECK(out.weights.val()(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((out.context.val() - f.table.desc_part->value.row(0))
            .cwiseAbs()
            .maxCoeff() < 1e-6);
}

TEST_CASE("weights respond to the query, not only to the labels") {
  Fixture f(3, 3, 3, 61);
  ad::Rng rng(7);
  ad::Tape t;
  Var q1 = t.constant(rng.uniform_mat(1, 3, -1.0, 1.0));
  Var q2 = t.constant(rng.uniform_mat(1, 3, -1.0, 1.0));
  Var table = f.table.combined(t);
  auto o1 = label_attention(q1, table, f.attn, t);
  auto o2 = label_attention(q2, table, f.attn, t);
  CHECK((o1.weights.val() - o2.weights.val()).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("hand-picked case matches the independent score-formula oracle") {
  Fixture f(3, 2, 2, 77);
  ad::Rng rng(99);
  Mat qv = rng.uniform_mat(1, 2, -1.0, 1.0);
  ad::Tape t;
  auto out = label_attention(t.constant(qv), f.table.combined(t), f.attn, t);

  Mat combined = f.table.desc_part->value + f.table.global_part->value;
  auto [ref_ctx, ref_w] = reference_attention(
      combined, qv.row(0), f.attn.proj->value, f.attn.proj_b->value.row(0),
      f.attn.w->value.row(0), f.attn.b->value(0, 0));
  CHECK((out.context.val().row(0) - ref_ctx).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((out.weights.val().row(0) - ref_w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("convexity: context reconstructs from returned weights") {
  Fixture f(5, 3, 4, 21);
  ad::Rng rng(2);
  ad::Tape t;
  Var q = t.constant(rng.uniform_mat(1, 4, -2.0, 2.0));
  auto out = label_attention(q, f.table.combined(t), f.attn, t);
  const Mat& w = out.weights.val();
  CHECK(w.minCoeff() >= 0.0);
  CHECK(std::abs(w.sum() - 1.0) < 1e-9);
  Mat combined = f.table.desc_part->value + f.table.global_part->value;
  Mat recon = w * combined;
  CHECK((recon - out.context.val()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("score shift via b leaves weights unchanged") {
  Fixture f(4, 3, 3, 33);
  ad::Rng rng(6);
  Mat qv = rng.uniform_mat(1, 3, -1.0, 1.0);

  ad::Tape t1;
  auto out1 = label_attention(t1.constant(qv), f.table.combined(t1), f.attn, t1);
  f.attn.b->value(0, 0) += 123.456;
  ad::Tape t2;
  auto out2 = label_attention(t2.constant(qv), f.table.combined(t2), f.attn, t2);
  CHECK((out1.weights.val() - out2.weights.val()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("gradients: w, b, global part, and query") {
  Fixture f(3, 3, 2, 41);
  ad::Rng rng(4);
  f.ps.add("query", rng.uniform_mat(1, 2, -1.0, 1.0));
  Mat target = rng.uniform_mat(1, 3, -1.0, 1.0);
  auto loss = [&](bool with_grad) {
    ad::Tape t;
    Var q = t.leaf(f.ps.at("query"));
    auto out = label_attention(q, f.table.combined(t), f.attn, t);
    Var diff = ad::sub(out.context, t.constant(target));
    Var s = ad::sum_all(ad::cmul(diff, diff));
    if (with_grad) t.backward(s);
    return s.scalar();
  };
  auto rep = gradcheck(f.ps, loss, "label_attention");
  CHECK_MESSAGE(rep.pass, rep.worst_at, " err=", rep.worst_rel_err);
}

TEST_CASE("desc part receives no gradient") {
  Fixture f(3, 3, 3, 51);
  ad::Tape t;
  ad::Rng rng(5);
  Var q = t.constant(rng.uniform_mat(1, 3, -1.0, 1.0));
  auto out = label_attention(q, f.table.combined(t), f.attn, t);
  Var s = ad::sum_all(out.context);
  f.ps.zero_grad();
  t.backward(s);
  CHECK(f.table.desc_part->grad.cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.table.global_part->grad.cwiseAbs().maxCoeff() > 0.0);
}
