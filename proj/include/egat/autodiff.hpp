#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace egat {

// Dense row-major 2-D tensor. Vectors are 1 x n or n x 1, scalars 1 x 1.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Shared, immutable index vector (edge endpoints, segment ids).
using Index = std::shared_ptr<const std::vector<std::uint32_t>>;
Index make_index(std::vector<std::uint32_t> v);
Index iota_index(std::size_t n);

struct Node;
class Tape;

// Handle to a value in the computation graph. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Var constant(Matrix value);
  // A leaf that accumulates gradients.
  static Var parameter(Matrix value);

  const Matrix& value() const;
  // Writable access for optimizers and loaders; never call during a recorded pass.
  Matrix& mutable_value();
  // Accumulated gradient; zeros when nothing reached this node.
  Matrix grad() const;
  bool has_grad() const;
  void zero_grad();

  bool requires_grad() const;
  std::array<std::size_t, 2> shape() const;
  std::size_t rows() const { return shape()[0]; }
  std::size_t cols() const { return shape()[1]; }
  double item() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

// Receives the finished node (value and grad are the op's output and its
// upstream gradient) and the input nodes in call order.
using BackwardFn = std::function<void(const Node& self, std::span<Node* const> inputs)>;

struct Node {
  Matrix value;
  Matrix grad;
  bool grad_allocated = false;
  bool requires_grad = false;
  bool is_leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;

  // Adds g into this node's gradient (allocating zeros on first use).
  void accumulate(const Matrix& g);
  Matrix& grad_buffer();
};

// Records differentiable ops executed on this thread while alive. Tapes nest;
// the innermost one records. Without an active tape ops only compute values,
// so intermediates are released as soon as their handles go out of scope.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Reverse-mode sweep in exact reverse execution order. Leaf gradients
  // accumulate additively. Throws ShapeMismatch for a non-scalar loss and
  // DisconnectedLoss when no parameter reaches it.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }
  std::vector<std::string> op_names() const;
  // Order in which the last backward() visited recorded ops.
  const std::vector<std::string>& backward_order() const { return backward_order_; }

  static Tape* active();
  void record(const std::shared_ptr<Node>& node);

 private:
  std::vector<std::shared_ptr<Node>> nodes_;
  std::vector<std::string> backward_order_;
  Tape* previous_ = nullptr;
};

// Disables recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Tape* saved_;
};

// Builds an op result. Records it when a tape is active and an input requires
// a gradient. Throws NonFinite if the value contains NaN or Inf.
Var make_op(const char* name, Matrix value, std::vector<Var> inputs, BackwardFn backward);

// ---- primitives -----------------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
// a (n x m) + b (1 x m) broadcast over rows.
Var add_bias(const Var& a, const Var& b);
// y = x W + b
Var linear(const Var& x, const Var& w, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& a, std::size_t begin, std::size_t count);
// Row-major reinterpretation.
Var reshape(const Var& a, std::size_t rows, std::size_t cols);
Var gather_rows(const Var& a, const Index& idx);
// out[seg[e]] += a[e]; out has n rows.
Var segment_sum(const Var& a, const Index& seg, std::size_t n);
// n x 1 column of row sums.
Var row_sum(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);

// out[dst[e]] += w[e] * v[src[e]]; w is E x 1.
Var weighted_aggregate(const Var& w, const Var& v, const Index& src, const Index& dst, std::size_t n);
// out[dst[e], k*C + c] += w[e] * u[e, k] * g[src[e], c]; u is a constant E x 3.
Var edge_outer_aggregate(const Var& w, const std::shared_ptr<const Matrix>& u, const Var& g,
                         const Index& src, const Index& dst, std::size_t n);
// Softmax of an E x 1 score column within each segment.
Var segment_softmax(const Var& scores, const Index& seg, std::size_t n);

Var elu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var sigmoid(const Var& a);
Var log(const Var& a);

// P is N x 3C in component-major layout (column k*C + c). Returns N x C of
// sqrt(sum_k P[:, kC+c]^2 + eps) - sqrt(eps): smooth everywhere and exactly 0
// for a zero channel.
Var channel_norm(const Var& p, std::size_t channels, double eps = 1e-8);

// sum_{r,c} w_c (softplus(z_rc) - y_rc z_rc) / denom. Stable logit form of the
// weighted binary cross-entropy; y and w are constants.
Var bce_with_logits(const Var& logits, const Matrix& targets, const Matrix& class_weights, double denom);

// Scalar helpers, overflow safe for any finite input.
double sigmoid_scalar(double x);
double softplus_scalar(double x);

}  // namespace egat
