#include "egat/autodiff.hpp"

#include "egat/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace egat {
namespace {

thread_local Tape* g_active_tape = nullptr;

void require(bool ok, const char* op, const char* what) {
  if (!ok) fail(ErrorCode::ShapeMismatch, std::string(op) + ": " + what);
}

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
    fail(ErrorCode::ShapeMismatch,
         std::string(op) + ": shapes " + shape_str(a.value()) + " and " + shape_str(b.value()));
}

void check_index(const Index& idx, std::size_t bound, const char* op) {
  require(static_cast<bool>(idx), op, "null index");
  for (auto i : *idx)
    if (i >= bound) fail(ErrorCode::ShapeMismatch, std::string(op) + ": index out of range");
}

}  // namespace

Index make_index(std::vector<std::uint32_t> v) {
  return std::make_shared<const std::vector<std::uint32_t>>(std::move(v));
}

Index iota_index(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return make_index(std::move(v));
}

// ---- Node / Var -----------------------------------------------------------

Matrix& Node::grad_buffer() {
  if (!grad_allocated) {
    grad = Matrix::Zero(value.rows(), value.cols());
    grad_allocated = true;
  }
  return grad;
}

void Node::accumulate(const Matrix& g) { grad_buffer() += g; }

Var Var::constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "constant";
  return Var(std::move(n));
}

Var Var::parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->op = "parameter";
  return Var(std::move(n));
}

const Matrix& Var::value() const { return node_->value; }
Matrix& Var::mutable_value() { return node_->value; }

Matrix Var::grad() const {
  if (node_->grad_allocated) return node_->grad;
  return Matrix::Zero(node_->value.rows(), node_->value.cols());
}

bool Var::has_grad() const { return node_->grad_allocated; }

void Var::zero_grad() {
  node_->grad_allocated = false;
  node_->grad.resize(0, 0);
}

bool Var::requires_grad() const { return node_->requires_grad; }

std::array<std::size_t, 2> Var::shape() const {
  return {static_cast<std::size_t>(node_->value.rows()), static_cast<std::size_t>(node_->value.cols())};
}

double Var::item() const {
  require(node_->value.size() == 1, "item", "not a scalar");
  return node_->value(0, 0);
}

// ---- Tape -----------------------------------------------------------------

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }
Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(const std::shared_ptr<Node>& node) { nodes_.push_back(node); }

std::vector<std::string> Tape::op_names() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.emplace_back(n->op);
  return out;
}

void Tape::backward(const Var& loss) {
  if (!loss) fail(ErrorCode::InvalidArgument, "backward: null loss");
  if (loss.value().size() != 1) fail(ErrorCode::ShapeMismatch, "backward: loss must be a scalar");
  if (!loss.requires_grad()) fail(ErrorCode::DisconnectedLoss, "backward: loss does not depend on any parameter");
  const bool on_tape = loss.node()->is_leaf ||
                       std::any_of(nodes_.begin(), nodes_.end(),
                                   [&](const auto& n) { return n.get() == loss.node(); });
  if (!on_tape) fail(ErrorCode::DisconnectedLoss, "backward: loss was not recorded on this tape");

  backward_order_.clear();
  loss.node()->grad_buffer().setConstant(1.0);
  std::vector<Node*> inputs;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (!n.grad_allocated) continue;
    backward_order_.emplace_back(n.op);
    inputs.clear();
    for (const auto& in : n.inputs) inputs.push_back(in.get());
    n.backward(n, inputs);
    // Intermediate gradients are no longer needed once propagated.
    n.grad_allocated = false;
    n.grad.resize(0, 0);
  }
}

NoGradGuard::NoGradGuard() : saved_(g_active_tape) { g_active_tape = nullptr; }
NoGradGuard::~NoGradGuard() { g_active_tape = saved_; }

Var make_op(const char* name, Matrix value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.allFinite()) fail(ErrorCode::NonFinite, std::string(name) + ": non-finite value");
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = name;
  n->is_leaf = false;
  Tape* tape = g_active_tape;
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Var& v) { return v.requires_grad(); });
  if (tape && needs) {
    n->requires_grad = true;
    n->inputs.reserve(inputs.size());
    for (auto& v : inputs) n->inputs.push_back(v.shared());
    n->backward = std::move(backward);
    tape->record(n);
  }
  return Var(std::move(n));
}

// ---- primitives -----------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  if (a.value().cols() != b.value().rows())
    fail(ErrorCode::ShapeMismatch, "matmul: " + shape_str(a.value()) + " x " + shape_str(b.value()));
  Matrix out = a.value() * b.value();
  return make_op("matmul", std::move(out), {a, b}, [](const Node& self, std::span<Node* const> in) {
    if (in[0]->requires_grad) in[0]->accumulate(self.grad * in[1]->value.transpose());
    if (in[1]->requires_grad) in[1]->accumulate(in[0]->value.transpose() * self.grad);
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  return make_op("add", a.value() + b.value(), {a, b}, [](const Node& self, std::span<Node* const> in) {
    for (Node* n : in)
      if (n->requires_grad) n->accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  return make_op("sub", a.value() - b.value(), {a, b}, [](const Node& self, std::span<Node* const> in) {
    if (in[0]->requires_grad) in[0]->accumulate(self.grad);
    if (in[1]->requires_grad) in[1]->accumulate(-self.grad);
  });
}

Var add_bias(const Var& a, const Var& b) {
  require(b.value().rows() == 1 && b.value().cols() == a.value().cols(), "add_bias", "bias must be 1 x cols");
  Matrix out = a.value();
  out.rowwise() += b.value().row(0);
  return make_op("add_bias", std::move(out), {a, b}, [](const Node& self, std::span<Node* const> in) {
    if (in[0]->requires_grad) in[0]->accumulate(self.grad);
    if (in[1]->requires_grad) in[1]->accumulate(self.grad.colwise().sum());
  });
}

Var linear(const Var& x, const Var& w, const Var& b) { return add_bias(matmul(x, w), b); }

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  return make_op("mul", a.value().cwiseProduct(b.value()), {a, b},
                 [](const Node& self, std::span<Node* const> in) {
                   if (in[0]->requires_grad) in[0]->accumulate(self.grad.cwiseProduct(in[1]->value));
                   if (in[1]->requires_grad) in[1]->accumulate(self.grad.cwiseProduct(in[0]->value));
                 });
}

Var scale(const Var& a, double s) {
  return make_op("scale", a.value() * s, {a}, [s](const Node& self, std::span<Node* const> in) {
    in[0]->accumulate(self.grad * s);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const auto rows = parts.front().value().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    require(p.value().rows() == rows, "concat_cols", "row counts differ");
    cols += p.value().cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.value().cols()) = p.value();
    at += p.value().cols();
  }
  return make_op("concat_cols", std::move(out), parts, [](const Node& self, std::span<Node* const> in) {
    Eigen::Index at = 0;
    for (Node* n : in) {
      const auto c = n->value.cols();
      if (n->requires_grad) n->accumulate(self.grad.middleCols(at, c));
      at += c;
    }
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t count) {
  require(begin + count <= static_cast<std::size_t>(a.value().rows()), "slice_rows", "range out of bounds");
  const auto b = static_cast<Eigen::Index>(begin), c = static_cast<Eigen::Index>(count);
  return make_op("slice_rows", a.value().middleRows(b, c), {a},
                 [b, c](const Node& self, std::span<Node* const> in) {
                   in[0]->grad_buffer().middleRows(b, c) += self.grad;
                 });
}

Var reshape(const Var& a, std::size_t rows, std::size_t cols) {
  require(rows * cols == static_cast<std::size_t>(a.value().size()), "reshape", "element count differs");
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), static_cast<Eigen::Index>(rows),
                                        static_cast<Eigen::Index>(cols));
  return make_op("reshape", std::move(out), {a}, [](const Node& self, std::span<Node* const> in) {
    in[0]->accumulate(Eigen::Map<const Matrix>(self.grad.data(), in[0]->value.rows(), in[0]->value.cols()));
  });
}

Var gather_rows(const Var& a, const Index& idx) {
  check_index(idx, static_cast<std::size_t>(a.value().rows()), "gather_rows");
  const auto& ix = *idx;
  Matrix out(static_cast<Eigen::Index>(ix.size()), a.value().cols());
  for (std::size_t e = 0; e < ix.size(); ++e) out.row(static_cast<Eigen::Index>(e)) = a.value().row(ix[e]);
  return make_op("gather_rows", std::move(out), {a}, [idx](const Node& self, std::span<Node* const> in) {
    Matrix& g = in[0]->grad_buffer();
    const auto& ix = *idx;
    for (std::size_t e = 0; e < ix.size(); ++e) g.row(ix[e]) += self.grad.row(static_cast<Eigen::Index>(e));
  });
}

Var segment_sum(const Var& a, const Index& seg, std::size_t n) {
  require(seg && seg->size() == static_cast<std::size_t>(a.value().rows()), "segment_sum", "segment length");
  check_index(seg, n, "segment_sum");
  const auto& s = *seg;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), a.value().cols());
  for (std::size_t e = 0; e < s.size(); ++e) out.row(s[e]) += a.value().row(static_cast<Eigen::Index>(e));
  return make_op("segment_sum", std::move(out), {a}, [seg](const Node& self, std::span<Node* const> in) {
    Matrix& g = in[0]->grad_buffer();
    const auto& s = *seg;
    for (std::size_t e = 0; e < s.size(); ++e) g.row(static_cast<Eigen::Index>(e)) += self.grad.row(s[e]);
  });
}

Var row_sum(const Var& a) {
  Matrix out = a.value().rowwise().sum();
  return make_op("row_sum", std::move(out), {a}, [](const Node& self, std::span<Node* const> in) {
    Matrix& g = in[0]->grad_buffer();
    g.colwise() += self.grad.col(0);
  });
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return make_op("sum", std::move(out), {a}, [](const Node& self, std::span<Node* const> in) {
    in[0]->grad_buffer().array() += self.grad(0, 0);
  });
}

Var mean(const Var& a) {
  require(a.value().size() > 0, "mean", "empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var weighted_aggregate(const Var& w, const Var& v, const Index& src, const Index& dst, std::size_t n) {
  const auto E = static_cast<std::size_t>(w.value().rows());
  require(w.value().cols() == 1, "weighted_aggregate", "weights must be E x 1");
  require(src && dst && src->size() == E && dst->size() == E, "weighted_aggregate", "index length");
  check_index(src, static_cast<std::size_t>(v.value().rows()), "weighted_aggregate");
  check_index(dst, n, "weighted_aggregate");
  const auto m = v.value().cols();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), m);
  const auto& s = *src;
  const auto& d = *dst;
  for (std::size_t e = 0; e < E; ++e) {
    const double we = w.value()(static_cast<Eigen::Index>(e), 0);
    const double* vr = v.value().row(s[e]).data();
    double* o = out.row(d[e]).data();
    for (Eigen::Index c = 0; c < m; ++c) o[c] += we * vr[c];
  }
  return make_op("weighted_aggregate", std::move(out), {w, v},
                 [src, dst](const Node& self, std::span<Node* const> in) {
                   Node& wn = *in[0];
                   Node& vn = *in[1];
                   const auto& s = *src;
                   const auto& d = *dst;
                   const auto m = vn.value.cols();
                   Matrix* gw = wn.requires_grad ? &wn.grad_buffer() : nullptr;
                   Matrix* gv = vn.requires_grad ? &vn.grad_buffer() : nullptr;
                   for (std::size_t e = 0; e < s.size(); ++e) {
                     const double* go = self.grad.row(d[e]).data();
                     if (gw) {
                       const double* vr = vn.value.row(s[e]).data();
                       double acc = 0.0;
                       for (Eigen::Index c = 0; c < m; ++c) acc += go[c] * vr[c];
                       (*gw)(static_cast<Eigen::Index>(e), 0) += acc;
                     }
                     if (gv) {
                       const double we = wn.value(static_cast<Eigen::Index>(e), 0);
                       double* g = gv->row(s[e]).data();
                       for (Eigen::Index c = 0; c < m; ++c) g[c] += we * go[c];
                     }
                   }
                 });
}

Var edge_outer_aggregate(const Var& w, const std::shared_ptr<const Matrix>& u, const Var& g,
                         const Index& src, const Index& dst, std::size_t n) {
  const auto E = static_cast<std::size_t>(w.value().rows());
  require(w.value().cols() == 1, "edge_outer_aggregate", "weights must be E x 1");
  require(u && u->rows() == static_cast<Eigen::Index>(E) && u->cols() == 3, "edge_outer_aggregate",
          "directions must be E x 3");
  require(src && dst && src->size() == E && dst->size() == E, "edge_outer_aggregate", "index length");
  check_index(src, static_cast<std::size_t>(g.value().rows()), "edge_outer_aggregate");
  check_index(dst, n, "edge_outer_aggregate");
  const auto C = g.value().cols();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), 3 * C);
  const auto& s = *src;
  const auto& d = *dst;
  for (std::size_t e = 0; e < E; ++e) {
    const auto ei = static_cast<Eigen::Index>(e);
    const double we = w.value()(ei, 0);
    const double* gr = g.value().row(s[e]).data();
    double* o = out.row(d[e]).data();
    for (Eigen::Index k = 0; k < 3; ++k) {
      const double f = we * (*u)(ei, k);
      double* ok = o + k * C;
      for (Eigen::Index c = 0; c < C; ++c) ok[c] += f * gr[c];
    }
  }
  return make_op("edge_outer_aggregate", std::move(out), {w, g},
                 [u, src, dst](const Node& self, std::span<Node* const> in) {
                   Node& wn = *in[0];
                   Node& gn = *in[1];
                   const auto& s = *src;
                   const auto& d = *dst;
                   const auto C = gn.value.cols();
                   Matrix* gw = wn.requires_grad ? &wn.grad_buffer() : nullptr;
                   Matrix* gg = gn.requires_grad ? &gn.grad_buffer() : nullptr;
                   for (std::size_t e = 0; e < s.size(); ++e) {
                     const auto ei = static_cast<Eigen::Index>(e);
                     const double* go = self.grad.row(d[e]).data();
                     const double* gr = gn.value.row(s[e]).data();
                     const double we = wn.value(ei, 0);
                     double acc = 0.0;
                     double* gs = gg ? gg->row(s[e]).data() : nullptr;
                     for (Eigen::Index k = 0; k < 3; ++k) {
                       const double uk = (*u)(ei, k);
                       const double* gok = go + k * C;
                       for (Eigen::Index c = 0; c < C; ++c) {
                         acc += uk * gok[c] * gr[c];
                         if (gs) gs[c] += we * uk * gok[c];
                       }
                     }
                     if (gw) (*gw)(ei, 0) += acc;
                   }
                 });
}

Var segment_softmax(const Var& scores, const Index& seg, std::size_t n) {
  require(scores.value().cols() == 1, "segment_softmax", "scores must be E x 1");
  require(seg && seg->size() == static_cast<std::size_t>(scores.value().rows()), "segment_softmax",
          "segment length");
  check_index(seg, n, "segment_softmax");
  const auto& s = *seg;
  std::vector<double> mx(n, -std::numeric_limits<double>::infinity());
  std::vector<double> denom(n, 0.0);
  const Matrix& x = scores.value();
  for (std::size_t e = 0; e < s.size(); ++e) mx[s[e]] = std::max(mx[s[e]], x(static_cast<Eigen::Index>(e), 0));
  Matrix out(x.rows(), 1);
  for (std::size_t e = 0; e < s.size(); ++e) {
    const double v = std::exp(x(static_cast<Eigen::Index>(e), 0) - mx[s[e]]);
    out(static_cast<Eigen::Index>(e), 0) = v;
    denom[s[e]] += v;
  }
  for (std::size_t e = 0; e < s.size(); ++e) out(static_cast<Eigen::Index>(e), 0) /= denom[s[e]];
  return make_op("segment_softmax", std::move(out), {scores},
                 [seg, n](const Node& self, std::span<Node* const> in) {
                   const auto& s = *seg;
                   std::vector<double> dot(n, 0.0);
                   for (std::size_t e = 0; e < s.size(); ++e) {
                     const auto ei = static_cast<Eigen::Index>(e);
                     dot[s[e]] += self.value(ei, 0) * self.grad(ei, 0);
                   }
                   Matrix& g = in[0]->grad_buffer();
                   for (std::size_t e = 0; e < s.size(); ++e) {
                     const auto ei = static_cast<Eigen::Index>(e);
                     g(ei, 0) += self.value(ei, 0) * (self.grad(ei, 0) - dot[s[e]]);
                   }
                 });
}

Var elu(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) { return x >= 0.0 ? x : std::expm1(x); });
  return make_op("elu", std::move(out), {a}, [](const Node& self, std::span<Node* const> in) {
    const Matrix& x = in[0]->value;
    Matrix d = x.binaryExpr(self.value, [](double xi, double yi) { return xi >= 0.0 ? 1.0 : yi + 1.0; });
    in[0]->accumulate(self.grad.cwiseProduct(d));
  });
}

Var leaky_relu(const Var& a, double slope) {
  Matrix out = a.value().unaryExpr([slope](double x) { return x >= 0.0 ? x : slope * x; });
  return make_op("leaky_relu", std::move(out), {a}, [slope](const Node& self, std::span<Node* const> in) {
    Matrix d = in[0]->value.unaryExpr([slope](double x) { return x >= 0.0 ? 1.0 : slope; });
    in[0]->accumulate(self.grad.cwiseProduct(d));
  });
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Var sigmoid(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) { return sigmoid_scalar(x); });
  return make_op("sigmoid", std::move(out), {a}, [](const Node& self, std::span<Node* const> in) {
    Matrix d = self.value.unaryExpr([](double y) { return y * (1.0 - y); });
    in[0]->accumulate(self.grad.cwiseProduct(d));
  });
}

Var log(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) { return std::log(x); });
  return make_op("log", std::move(out), {a}, [](const Node& self, std::span<Node* const> in) {
    in[0]->accumulate(self.grad.cwiseQuotient(in[0]->value));
  });
}

Var channel_norm(const Var& p, std::size_t channels, double eps) {
  const auto C = static_cast<Eigen::Index>(channels);
  require(p.value().cols() == 3 * C, "channel_norm", "expected N x 3C input");
  const Matrix& x = p.value();
  const double floor = std::sqrt(eps);
  Matrix out(x.rows(), C);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index c = 0; c < C; ++c) {
      const double a = x(i, c), b = x(i, C + c), d = x(i, 2 * C + c);
      out(i, c) = std::sqrt(a * a + b * b + d * d + eps) - floor;
    }
  return make_op("channel_norm", std::move(out), {p}, [C, floor](const Node& self, std::span<Node* const> in) {
    const Matrix& x = in[0]->value;
    Matrix& g = in[0]->grad_buffer();
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index c = 0; c < C; ++c) {
        const double f = self.grad(i, c) / (self.value(i, c) + floor);
        for (Eigen::Index k = 0; k < 3; ++k) g(i, k * C + c) += f * x(i, k * C + c);
      }
  });
}

Var bce_with_logits(const Var& logits, const Matrix& targets, const Matrix& class_weights, double denom) {
  const Matrix& z = logits.value();
  require(targets.rows() == z.rows() && targets.cols() == z.cols(), "bce_with_logits", "targets shape");
  require(class_weights.rows() == 1 && class_weights.cols() == z.cols(), "bce_with_logits",
          "class weights must be 1 x classes");
  if (!(denom > 0.0)) fail(ErrorCode::InvalidArgument, "bce_with_logits: denominator must be positive");
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    for (Eigen::Index c = 0; c < z.cols(); ++c)
      total += class_weights(0, c) * (softplus_scalar(z(r, c)) - targets(r, c) * z(r, c));
  Matrix out(1, 1);
  out(0, 0) = total / denom;
  return make_op("bce_with_logits", std::move(out), {logits},
                 [targets, class_weights, denom](const Node& self, std::span<Node* const> in) {
                   const Matrix& z = in[0]->value;
                   Matrix& g = in[0]->grad_buffer();
                   const double up = self.grad(0, 0) / denom;
                   for (Eigen::Index r = 0; r < z.rows(); ++r)
                     for (Eigen::Index c = 0; c < z.cols(); ++c)
                       g(r, c) += up * class_weights(0, c) * (sigmoid_scalar(z(r, c)) - targets(r, c));
                 });
}

}  // namespace egat
