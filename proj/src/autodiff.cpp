#include "slotgraph/autodiff.hpp"

#include <cmath>
#include <limits>

namespace slotgraph::ad {

// ---- ParamStore ---------------------------------------------------------

Param& ParamStore::add(const std::string& name, Mat init, bool trainable) {
  if (by_name_.count(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  items_.push_back(std::make_unique<Param>(name, std::move(init), trainable));
  Param* p = items_.back().get();
  by_name_[name] = p;
  return *p;
}

Param* ParamStore::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

const Param* ParamStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

Param& ParamStore::at(const std::string& name) {
  Param* p = find(name);
  if (!p) throw std::out_of_range("no such parameter: " + name);
  return *p;
}

void ParamStore::zero_grad() {
  for (auto& p : items_) p->grad.setZero();
}

std::size_t ParamStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : items_) {
    if (p->trainable) n += static_cast<std::size_t>(p->value.size());
  }
  return n;
}

// ---- Var / Tape ---------------------------------------------------------

const Mat& Var::val() const { return tape_->val(id_); }

double Var::scalar() const {
  const Mat& v = val();
  if (v.size() != 1) throw std::logic_error("scalar() on non-1x1 value");
  return v(0, 0);
}

Var Tape::constant(Mat v) {
  nodes_.push_back(Node{std::move(v), {}, nullptr, false, false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Param& p) {
  nodes_.push_back(Node{p.value, {}, nullptr, p.trainable, false});
  int id = static_cast<int>(nodes_.size()) - 1;
  if (p.trainable) leaves_.emplace_back(&p, id);
  return Var(this, id);
}

Var Tape::make(Mat v, BackFn back, bool needs_grad) {
  nodes_.push_back(Node{std::move(v), {}, std::move(back), needs_grad, false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Mat& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (!n.grad_init) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.grad_init = true;
  }
  return n.grad;
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw std::logic_error("loss from another tape");
  grad(loss.id())(0, 0) = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back && n.grad_init) n.back(*this, i);
  }
  for (auto& [p, id] : leaves_) {
    if (nodes_[id].grad_init) p->grad += nodes_[id].grad;
  }
}

// ---- op helpers ---------------------------------------------------------

namespace {

bool wants(Tape& t, Var v) { return t.needs_grad(v.id()); }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape();
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul");
  Mat v = a.val() * b.val();
  int ia = a.id(), ib = b.id();
  bool ga = wants(t, a), gb = wants(t, b);
  return t.make(std::move(v), [ia, ib, ga, gb](Tape& tp, int self) {
    const Mat& g = tp.grad(self);
    if (ga) tp.grad(ia).noalias() += g * tp.val(ib).transpose();
    if (gb) tp.grad(ib).noalias() += tp.val(ia).transpose() * g;
  }, ga || gb);
}

Var transpose(Var a) {
  Tape& t = *a.tape();
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(a.val().transpose(), [ia, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia) += tp.grad(self).transpose();
  }, ga);
}

Var add(Var a, Var b) {
  Tape& t = *a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("add");
  int ia = a.id(), ib = b.id();
  bool ga = wants(t, a), gb = wants(t, b);
  return t.make(a.val() + b.val(), [ia, ib, ga, gb](Tape& tp, int self) {
    if (ga) tp.grad(ia) += tp.grad(self);
    if (gb) tp.grad(ib) += tp.grad(self);
  }, ga || gb);
}

Var sub(Var a, Var b) {
  Tape& t = *a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("sub");
  int ia = a.id(), ib = b.id();
  bool ga = wants(t, a), gb = wants(t, b);
  return t.make(a.val() - b.val(), [ia, ib, ga, gb](Tape& tp, int self) {
    if (ga) tp.grad(ia) += tp.grad(self);
    if (gb) tp.grad(ib) -= tp.grad(self);
  }, ga || gb);
}

Var add_rowvec(Var a, Var b) {
  Tape& t = *a.tape();
  if (b.rows() != 1 || a.cols() != b.cols()) throw DimensionMismatch("add_rowvec");
  Mat v = a.val();
  v.array().rowwise() += b.val().row(0).array();
  int ia = a.id(), ib = b.id();
  bool ga = wants(t, a), gb = wants(t, b);
  return t.make(std::move(v), [ia, ib, ga, gb](Tape& tp, int self) {
    const Mat& g = tp.grad(self);
    if (ga) tp.grad(ia) += g;
    if (gb) tp.grad(ib) += g.colwise().sum();
  }, ga || gb);
}

Var broadcast_row(Var a, long n) {
  Tape& t = *a.tape();
  if (a.rows() != 1) throw DimensionMismatch("broadcast_row expects 1×m");
  Mat v = a.val().replicate(n, 1);
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia) += tp.grad(self).colwise().sum();
  }, ga);
}

Var broadcast_col(Var a, long m) {
  Tape& t = *a.tape();
  if (a.cols() != 1) throw DimensionMismatch("broadcast_col expects n×1");
  Mat v = a.val().replicate(1, m);
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia) += tp.grad(self).rowwise().sum();
  }, ga);
}

Var cmul(Var a, Var b) {
  Tape& t = *a.tape();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("cmul");
  int ia = a.id(), ib = b.id();
  bool ga = wants(t, a), gb = wants(t, b);
  return t.make(a.val().cwiseProduct(b.val()), [ia, ib, ga, gb](Tape& tp, int self) {
    const Mat& g = tp.grad(self);
    if (ga) tp.grad(ia) += g.cwiseProduct(tp.val(ib));
    if (gb) tp.grad(ib) += g.cwiseProduct(tp.val(ia));
  }, ga || gb);
}

Var scale(Var a, double s) {
  Tape& t = *a.tape();
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(a.val() * s, [ia, s, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia) += s * tp.grad(self);
  }, ga);
}

Var concat_cols(Var a, Var b) {
  Tape& t = *a.tape();
  if (a.rows() != b.rows()) throw DimensionMismatch("concat_cols");
  Mat v(a.rows(), a.cols() + b.cols());
  v << a.val(), b.val();
  int ia = a.id(), ib = b.id();
  long ca = a.cols(), cb = b.cols();
  bool ga = wants(t, a), gb = wants(t, b);
  return t.make(std::move(v), [ia, ib, ca, cb, ga, gb](Tape& tp, int self) {
    const Mat& g = tp.grad(self);
    if (ga) tp.grad(ia) += g.leftCols(ca);
    if (gb) tp.grad(ib) += g.rightCols(cb);
  }, ga || gb);
}

Var concat_rows(Var a, Var b) {
  Tape& t = *a.tape();
  if (a.cols() != b.cols()) throw DimensionMismatch("concat_rows");
  Mat v(a.rows() + b.rows(), a.cols());
  v << a.val(), b.val();
  int ia = a.id(), ib = b.id();
  long ra = a.rows(), rb = b.rows();
  bool ga = wants(t, a), gb = wants(t, b);
  return t.make(std::move(v), [ia, ib, ra, rb, ga, gb](Tape& tp, int self) {
    const Mat& g = tp.grad(self);
    if (ga) tp.grad(ia) += g.topRows(ra);
    if (gb) tp.grad(ib) += g.bottomRows(rb);
  }, ga || gb);
}

Var cols(Var a, long start, long n) {
  Tape& t = *a.tape();
  if (start < 0 || start + n > a.cols()) throw DimensionMismatch("cols slice");
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(a.val().middleCols(start, n), [ia, start, n, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia).middleCols(start, n) += tp.grad(self);
  }, ga);
}

Var rows(Var a, long start, long n) {
  Tape& t = *a.tape();
  if (start < 0 || start + n > a.rows()) throw DimensionMismatch("rows slice");
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(a.val().middleRows(start, n), [ia, start, n, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia).middleRows(start, n) += tp.grad(self);
  }, ga);
}

Var row(Var a, long i) { return rows(a, i, 1); }

Var mean_of_rows(Var a) {
  Tape& t = *a.tape();
  long n = a.rows();
  Mat v = a.val().colwise().mean();
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, n, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia) += tp.grad(self).replicate(n, 1) / static_cast<double>(n);
  }, ga);
}

Var gather_rows(Var a, std::vector<long> idx) {
  Tape& t = *a.tape();
  const Mat& av = a.val();
  Mat v(static_cast<long>(idx.size()), av.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= av.rows()) throw DimensionMismatch("gather_rows");
    v.row(static_cast<long>(k)) = av.row(idx[k]);
  }
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, idx = std::move(idx), ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& g = tp.grad(self);
    Mat& da = tp.grad(ia);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      da.row(idx[k]) += g.row(static_cast<long>(k));
    }
  }, ga);
}

Var sum_all(Var a) {
  Tape& t = *a.tape();
  Mat v(1, 1);
  v(0, 0) = a.val().sum();
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia).array() += tp.grad(self)(0, 0);
  }, ga);
}

Var pick(Var a, long i, long j) {
  Tape& t = *a.tape();
  Mat v(1, 1);
  v(0, 0) = a.val()(i, j);
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, i, j, ga](Tape& tp, int self) {
    if (ga) tp.grad(ia)(i, j) += tp.grad(self)(0, 0);
  }, ga);
}

Var sigmoid(Var a) {
  Tape& t = *a.tape();
  Mat v = (1.0 / (1.0 + (-a.val().array()).exp())).matrix();
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& y = tp.val(self);
    tp.grad(ia).array() +=
        tp.grad(self).array() * y.array() * (1.0 - y.array());
  }, ga);
}

Var tanh_(Var a) {
  Tape& t = *a.tape();
  Mat v = a.val().array().tanh().matrix();
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& y = tp.val(self);
    tp.grad(ia).array() +=
        tp.grad(self).array() * (1.0 - y.array().square());
  }, ga);
}

Var elu(Var a) {
  Tape& t = *a.tape();
  Mat v = a.val().unaryExpr([](double x) { return x > 0 ? x : std::expm1(x); });
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& x = tp.val(ia);
    const Mat& y = tp.val(self);
    Mat d = x.binaryExpr(y, [](double xi, double yi) {
      return xi > 0 ? 1.0 : yi + 1.0;
    });
    tp.grad(ia).array() += tp.grad(self).array() * d.array();
  }, ga);
}

Var leaky_relu(Var a, double slope) {
  Tape& t = *a.tape();
  Mat v = a.val().unaryExpr([slope](double x) { return x > 0 ? x : slope * x; });
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, slope, ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& x = tp.val(ia);
    Mat d = x.unaryExpr([slope](double xi) { return xi > 0 ? 1.0 : slope; });
    tp.grad(ia).array() += tp.grad(self).array() * d.array();
  }, ga);
}

namespace {
constexpr double inv_sqrt2 = 0.7071067811865475244;
constexpr double inv_sqrt2pi = 0.3989422804014326779;
}  // namespace

Var gelu(Var a) {
  Tape& t = *a.tape();
  Mat v = a.val().unaryExpr([](double x) {
    return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
  });
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& x = tp.val(ia);
    Mat d = x.unaryExpr([](double xi) {
      double cdf = 0.5 * (1.0 + std::erf(xi * inv_sqrt2));
      double pdf = inv_sqrt2pi * std::exp(-0.5 * xi * xi);
      return cdf + xi * pdf;
    });
    tp.grad(ia).array() += tp.grad(self).array() * d.array();
  }, ga);
}

namespace {

Mat softmax_rows_value(const Mat& x) {
  Mat y(x.rows(), x.cols());
  for (long i = 0; i < x.rows(); ++i) {
    double m = x.row(i).maxCoeff();
    Eigen::ArrayXd e = (x.row(i).array() - m).exp();
    y.row(i) = (e / e.sum()).matrix();
  }
  return y;
}

}  // namespace

Var softmax_rows(Var a) {
  Tape& t = *a.tape();
  Mat v = softmax_rows_value(a.val());
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& y = tp.val(self);
    const Mat& g = tp.grad(self);
    Mat& da = tp.grad(ia);
    for (long i = 0; i < y.rows(); ++i) {
      double dot = g.row(i).dot(y.row(i));
      da.row(i).array() += (g.row(i).array() - dot) * y.row(i).array();
    }
  }, ga);
}

Var masked_softmax_rows(Var a, const Mat& mask) {
  Tape& t = *a.tape();
  const Mat& x = a.val();
  if (mask.rows() != x.rows() || mask.cols() != x.cols()) {
    throw DimensionMismatch("masked_softmax_rows mask shape");
  }
  Mat y = Mat::Zero(x.rows(), x.cols());
  for (long i = 0; i < x.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (long j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0 && x(i, j) > m) m = x(i, j);
    }
    if (!std::isfinite(m)) {
      throw std::invalid_argument("masked softmax: empty row neighborhood");
    }
    double z = 0;
    for (long j = 0; j < x.cols(); ++j) {
      if (mask(i, j) != 0) {
        y(i, j) = std::exp(x(i, j) - m);
        z += y(i, j);
      }
    }
    for (long j = 0; j < x.cols(); ++j) y(i, j) /= z;
  }
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(y), [ia, ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& y2 = tp.val(self);
    const Mat& g = tp.grad(self);
    Mat& da = tp.grad(ia);
    for (long i = 0; i < y2.rows(); ++i) {
      double dot = g.row(i).dot(y2.row(i));
      da.row(i).array() += (g.row(i).array() - dot) * y2.row(i).array();
    }
  }, ga);
}

Var layernorm_rows(Var x, Var gain, Var bias, double eps) {
  Tape& t = *x.tape();
  const Mat& xv = x.val();
  long n = xv.rows(), d = xv.cols();
  if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d) {
    throw DimensionMismatch("layernorm gain/bias");
  }
  Mat xhat(n, d), inv_std(n, 1);
  for (long i = 0; i < n; ++i) {
    double mu = xv.row(i).mean();
    double var = (xv.row(i).array() - mu).square().mean();
    double is = 1.0 / std::sqrt(var + eps);
    inv_std(i, 0) = is;
    xhat.row(i) = ((xv.row(i).array() - mu) * is).matrix();
  }
  Mat v = xhat;
  v.array().rowwise() *= gain.val().row(0).array();
  v.array().rowwise() += bias.val().row(0).array();
  int ix = x.id(), ig = gain.id(), ib = bias.id();
  bool gx = wants(t, x), gg = wants(t, gain), gb = wants(t, bias);
  // stash xhat and inv_std as constants on the tape for the backward pass
  Var xhat_c = t.constant(xhat);
  Var istd_c = t.constant(inv_std);
  int ixh = xhat_c.id(), iis = istd_c.id();
  return t.make(std::move(v),
                [ix, ig, ib, ixh, iis, gx, gg, gb, d](Tape& tp, int self) {
    const Mat& g = tp.grad(self);
    const Mat& xh = tp.val(ixh);
    const Mat& is = tp.val(iis);
    const Mat& gamma = tp.val(ig);
    if (gg) tp.grad(ig) += g.cwiseProduct(xh).colwise().sum();
    if (gb) tp.grad(ib) += g.colwise().sum();
    if (!gx) return;
    Mat& dx = tp.grad(ix);
    double dd = static_cast<double>(d);
    using RowArr = Eigen::Array<double, 1, Eigen::Dynamic>;
    for (long i = 0; i < g.rows(); ++i) {
      RowArr dxhat = g.row(i).array() * gamma.row(0).array();
      RowArr xhr = xh.row(i).array();
      double s1 = dxhat.sum();
      double s2 = (dxhat * xhr).sum();
      dx.row(i).array() += is(i, 0) / dd * (dd * dxhat - s1 - xhr * s2);
    }
  }, gx || gg || gb);
}

Var log_clamped(Var a, double floor) {
  Tape& t = *a.tape();
  Mat v = a.val().unaryExpr([floor](double x) { return std::log(std::max(x, floor)); });
  int ia = a.id();
  bool ga = wants(t, a);
  return t.make(std::move(v), [ia, floor, ga](Tape& tp, int self) {
    if (!ga) return;
    const Mat& x = tp.val(ia);
    Mat d = x.unaryExpr([floor](double xi) { return xi > floor ? 1.0 / xi : 0.0; });
    tp.grad(ia).array() += tp.grad(self).array() * d.array();
  }, ga);
}

Var linear(Var x, Var w, Var b) {
  return add_rowvec(matmul(x, transpose(w)), b);
}

// ---- Rng ----------------------------------------------------------------

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(gen_);
}

Mat Rng::uniform_mat(long rows, long cols, double lo, double hi) {
  Mat m(rows, cols);
  std::uniform_real_distribution<double> d(lo, hi);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = d(gen_);
  return m;
}

Mat Rng::xavier(long out, long in) {
  double lim = std::sqrt(6.0 / static_cast<double>(in + out));
  return uniform_mat(out, in, -lim, lim);
}

Mat Rng::dropout_mask(long rows, long cols, double rate) {
  Mat m(rows, cols);
  if (rate <= 0.0) {
    m.setOnes();
    return m;
  }
  std::uniform_real_distribution<double> d(0.0, 1.0);
  double keep = 1.0 - rate;
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = d(gen_) < rate ? 0.0 : 1.0 / keep;
  return m;
}

}  // namespace slotgraph::ad
