#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace slotgraph::ad {

using Mat = Eigen::MatrixXd;

/// Named trainable (or frozen) tensor with optimizer slots.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat adam_m;
  Mat adam_v;
  bool trainable = true;

  Param(std::string n, Mat v, bool train)
      : name(std::move(n)),
        value(std::move(v)),
        trainable(train) {
    grad = Mat::Zero(value.rows(), value.cols());
    adam_m = Mat::Zero(value.rows(), value.cols());
    adam_v = Mat::Zero(value.rows(), value.cols());
  }
};

/// Ordered collection of parameters; order is creation order and fixed,
/// which keeps optimizer updates and checkpoints reproducible.
class ParamStore {
 public:
  Param& add(const std::string& name, Mat init, bool trainable = true);
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  Param& at(const std::string& name);

  std::vector<std::unique_ptr<Param>>& items() { return items_; }
  const std::vector<std::unique_ptr<Param>>& items() const { return items_; }

  void zero_grad();
  std::size_t size() const { return items_.size(); }
  /// Total element count of trainable tensors.
  std::size_t trainable_count() const;

 private:
  std::vector<std::unique_ptr<Param>> items_;
  std::map<std::string, Param*> by_name_;
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; invalid once the tape dies.
class Var {
 public:
  Var() = default;
  Var(Tape* t, int id) : tape_(t), id_(id) {}

  const Mat& val() const;
  double scalar() const;
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  long rows() const { return val().rows(); }
  long cols() const { return val().cols(); }
  explicit operator bool() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Dynamic reverse-mode tape over dense matrices.
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int self)>;

  Var constant(Mat v);
  Var leaf(Param& p);
  Var make(Mat v, BackFn back, bool needs_grad = true);

  const Mat& val(int id) const { return nodes_[id].value; }
  Mat& grad(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  /// Seeds d(loss)/d(loss) = 1 and runs the tape in reverse, then flushes
  /// accumulated leaf gradients into their Params (+=).
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    BackFn back;
    bool needs_grad = false;
    bool grad_init = false;
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<Param*, int>> leaves_;
};

// ---- ops ----------------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// a: n×m, b: 1×m added to every row.
Var add_rowvec(Var a, Var b);
/// Replicate a 1×m row n times.
Var broadcast_row(Var a, long n);
/// Replicate an n×1 column m times.
Var broadcast_col(Var a, long m);
Var cmul(Var a, Var b);
Var scale(Var a, double s);
Var concat_cols(Var a, Var b);
Var concat_rows(Var a, Var b);
Var cols(Var a, long start, long n);
Var rows(Var a, long start, long n);
Var row(Var a, long i);
Var mean_of_rows(Var a);
/// Stack rows a[idx[0]], a[idx[1]], ... (indices may repeat).
Var gather_rows(Var a, std::vector<long> idx);
Var sum_all(Var a);
Var pick(Var a, long i, long j);

Var sigmoid(Var a);
Var tanh_(Var a);
Var elu(Var a);
Var leaky_relu(Var a, double slope);
Var gelu(Var a);
Var softmax_rows(Var a);
/// Row softmax restricted to positions where mask != 0; masked-out entries
/// of the result are exactly zero. Every row of mask must have a nonzero.
Var masked_softmax_rows(Var a, const Mat& mask);
Var layernorm_rows(Var x, Var gain, Var bias, double eps = 1e-5);
/// log(max(a, floor)); gradient is zero on the clamped region.
Var log_clamped(Var a, double floor = 1e-12);

/// x:(n×in) · Wᵀ:(in×out) + b:(1×out).
Var linear(Var x, Var w, Var b);

// ---- rng / init ---------------------------------------------------------

/// Seeded generator with explicit sampling, one stream per purpose.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi);
  Mat uniform_mat(long rows, long cols, double lo, double hi);
  /// Xavier/Glorot uniform for a (out×in) weight.
  Mat xavier(long out, long in);
  /// Bernoulli keep-mask scaled by 1/(1-rate) (inverted dropout).
  Mat dropout_mask(long rows, long cols, double rate);
  std::uint64_t next_u64() { return gen_(); }
  std::mt19937_64& gen() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what)
      : std::runtime_error("dimension mismatch: " + what) {}
};

}  // namespace slotgraph::ad
