#include "egat/model.hpp"

#include "egat/error.hpp"

#include <cmath>

namespace egat {

GraphInput make_graph_input(const AtomGraph& g, const NodeFeatures& f) {
  if (f.atom_count != g.node_count)
    fail(ErrorCode::ShapeMismatch, "feature rows do not match graph nodes");
  GraphInput in;
  in.node_count = g.node_count;
  in.residue_count = g.residue_count;
  in.features = Eigen::Map<const Matrix>(f.data.data(), static_cast<Eigen::Index>(f.atom_count),
                                         static_cast<Eigen::Index>(f.dim));
  in.src = make_index(g.src);
  in.dst = make_index(g.dst);
  const auto E = static_cast<Eigen::Index>(g.edge_count());
  in.dist.resize(E, 1);
  auto dir = std::make_shared<Matrix>(E, 3);
  for (Eigen::Index e = 0; e < E; ++e) {
    in.dist(e, 0) = g.dist[static_cast<std::size_t>(e)];
    dir->row(e) = g.dir[static_cast<std::size_t>(e)].transpose();
  }
  in.dir = std::move(dir);
  in.residue = make_index(g.residue_index);
  in.config_hash = f.config_hash;
  return in;
}

// ---- parameters -----------------------------------------------------------

namespace {

std::string layer_name(std::size_t l, const char* what) { return "gat" + std::to_string(l) + "." + what; }

}  // namespace

void Model::add(const std::string& name, std::size_t rows, std::size_t cols) {
  index_[name] = params_.size();
  names_.push_back(name);
  params_.push_back(Var::parameter(Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols))));
}

Model Model::zeros(const ModelConfig& c) {
  if (c.latent_dim == 0 || c.input_dim == 0 || c.num_classes == 0)
    fail(ErrorCode::InvalidArgument, "model dimensions must be positive");
  Model m;
  m.config_ = c;
  const std::size_t C = c.latent_dim;

  std::size_t in = c.input_dim;
  std::vector<std::size_t> widths = c.embed_hidden;
  widths.push_back(C);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    m.add("embed" + std::to_string(i) + ".weight", in, widths[i]);
    m.add("embed" + std::to_string(i) + ".bias", 1, widths[i]);
    in = widths[i];
  }
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    m.add(layer_name(l, "W"), C, C);
    m.add(layer_name(l, "W_self"), C, C);
    m.add(layer_name(l, "a"), c.attention_dim(), 1);
    m.add(layer_name(l, "w_dir"), C, 1);
    m.add(layer_name(l, "W_u"), C, C);
    m.add(layer_name(l, "W_p"), C, C);
    m.add(layer_name(l, "W_norm"), C + 1, C);
  }
  m.add("pool.W_q", C, C);
  m.add("pool.q", C, 1);

  in = 2 * C;
  widths = c.decoder_hidden;
  widths.push_back(c.num_classes);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    m.add("decoder" + std::to_string(i) + ".weight", in, widths[i]);
    m.add("decoder" + std::to_string(i) + ".bias", 1, widths[i]);
    in = widths[i];
  }
  return m;
}

Model Model::initialize(const ModelConfig& c, std::uint64_t seed) {
  Model m = zeros(c);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m.names_.size(); ++i) {
    const std::string& name = m.names_[i];
    Matrix& w = m.params_[i].mutable_value();
    if (name.ends_with(".bias")) continue;
    if (name == "pool.q") {
      std::normal_distribution<double> normal(0.0, 0.1);
      for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = normal(rng);
    } else {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
      std::uniform_real_distribution<double> uni(-limit, limit);
      for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = uni(rng);
    }
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = static_cast<double>(static_cast<float>(w.data()[k]));
  }
  return m;
}

Var& Model::param(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::InvalidArgument, "unknown parameter " + name);
  return params_[it->second];
}

const Var& Model::param(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::InvalidArgument, "unknown parameter " + name);
  return params_[it->second];
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value().size());
  return n;
}

void Model::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

// ---- stages ---------------------------------------------------------------

namespace {

Var dropout(const Var& x, double rate, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(x.value().rows(), x.value().cols());
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = keep(rng) ? scale : 0.0;
  return mul(x, Var::constant(std::move(mask)));
}

// Rows of a N x 3C vector state, viewed as 3N x C, multiplied by a C x C' weight.
Var mix_channels(const Var& p, const Var& w, std::size_t n) {
  const std::size_t C = static_cast<std::size_t>(w.value().rows());
  const std::size_t Cout = static_cast<std::size_t>(w.value().cols());
  return reshape(matmul(reshape(p, 3 * n, C), w), n, 3 * Cout);
}

}  // namespace

Var embed(const Model& m, const Matrix& features, const ForwardOptions& opts) {
  const ModelConfig& c = m.config();
  if (static_cast<std::size_t>(features.cols()) != c.input_dim)
    fail(ErrorCode::DimensionMismatch, "feature width " + std::to_string(features.cols()) +
                                           " does not match model input " + std::to_string(c.input_dim));
  Var x = Var::constant(features);
  const std::size_t stages = c.embed_hidden.size() + 1;
  for (std::size_t i = 0; i < stages; ++i) {
    x = elu(linear(x, m.param("embed" + std::to_string(i) + ".weight"), m.param("embed" + std::to_string(i) + ".bias")));
    if (opts.training && c.dropout > 0.0) {
      if (!opts.rng) fail(ErrorCode::InvalidArgument, "training forward needs an rng for dropout");
      x = dropout(x, c.dropout, *opts.rng);
    }
  }
  return x;
}

Var attention_coefficients(const Model& m, std::size_t layer, const NodeState& s, const GraphInput& g) {
  const ModelConfig& c = m.config();
  const std::size_t C = c.latent_dim;
  const std::size_t N = g.node_count;
  const Var& a = m.param(layer_name(layer, "a"));
  const Var wh = matmul(s.h, m.param(layer_name(layer, "W")));

  // Invariant edge scalars from the learned direction pi = P w_dir (N x 3).
  const Var pi = reshape(matmul(reshape(s.p, 3 * N, C), m.param(layer_name(layer, "w_dir"))), N, 3);
  const Var u = Var::constant(*g.dir);
  const Var pi_i = gather_rows(pi, g.dst);
  const Var pi_j = gather_rows(pi, g.src);
  const Var edge = concat_cols({Var::constant(g.dist), row_sum(mul(u, pi_i)), row_sum(mul(u, pi_j)),
                                row_sum(mul(pi_i, pi_j))});

  const Var score_i = gather_rows(matmul(wh, slice_rows(a, 0, C)), g.dst);
  const Var score_j = gather_rows(matmul(wh, slice_rows(a, C, C)), g.src);
  const Var score_e = matmul(edge, slice_rows(a, 2 * C, ModelConfig::kEdgeFeatures));
  const Var raw = leaky_relu(add(add(score_i, score_j), score_e), c.leaky_slope);
  return segment_softmax(raw, g.dst, N);
}

NodeState gat_layer(const Model& m, std::size_t layer, const NodeState& s, const GraphInput& g,
                    Var* attention_out) {
  const std::size_t N = g.node_count;
  const std::size_t C = m.config().latent_dim;
  const Var attn = attention_coefficients(m, layer, s, g);
  if (attention_out) *attention_out = attn;

  const Var p_msg = weighted_aggregate(attn, mix_channels(s.p, m.param(layer_name(layer, "W_p")), N), g.src, g.dst, N);
  const Var p_dir = edge_outer_aggregate(attn, g.dir, matmul(s.h, m.param(layer_name(layer, "W_u"))), g.src, g.dst, N);
  NodeState out;
  out.p = add(p_msg, p_dir);

  const Var nu = channel_norm(out.p, C);
  const Var diag = segment_sum(mul(attn, Var::constant(g.dist)), g.dst, N);
  const Var self_term = matmul(s.h, m.param(layer_name(layer, "W_self")));
  const Var messages = weighted_aggregate(attn, matmul(s.h, m.param(layer_name(layer, "W"))), g.src, g.dst, N);
  const Var reinject = matmul(concat_cols({nu, diag}), m.param(layer_name(layer, "W_norm")));
  out.h = elu(add(add(self_term, messages), reinject));
  return out;
}

PooledState residue_pool(const Model& m, const NodeState& s, const GraphInput& g) {
  const std::size_t R = g.residue_count;
  const Var q = matmul(s.h, m.param("pool.W_q"));
  PooledState out;
  out.beta = segment_softmax(matmul(q, m.param("pool.q")), g.residue, R);
  const Index self = iota_index(g.node_count);
  out.q = weighted_aggregate(out.beta, q, self, g.residue, R);
  out.p = weighted_aggregate(out.beta, s.p, self, g.residue, R);
  return out;
}

Var decode(const Model& m, const PooledState& pooled) {
  const ModelConfig& c = m.config();
  Var x = concat_cols({pooled.q, channel_norm(pooled.p, c.latent_dim)});
  const std::size_t stages = c.decoder_hidden.size() + 1;
  for (std::size_t i = 0; i < stages; ++i) {
    x = linear(x, m.param("decoder" + std::to_string(i) + ".weight"), m.param("decoder" + std::to_string(i) + ".bias"));
    if (i + 1 < stages) x = elu(x);
  }
  return x;
}

ForwardResult forward(const Model& m, const GraphInput& g, const ForwardOptions& opts) {
  if (!m.feature_config_hash.empty() && !g.config_hash.empty() && m.feature_config_hash != g.config_hash)
    fail(ErrorCode::ConfigHashMismatch, "feature config hash " + g.config_hash +
                                            " does not match checkpoint " + m.feature_config_hash);
  if (static_cast<std::size_t>(g.features.rows()) != g.node_count)
    fail(ErrorCode::ShapeMismatch, "feature rows do not match node count");
  if (!g.residue || g.residue->size() != g.node_count)
    fail(ErrorCode::ShapeMismatch, "every node needs a residue");

  const std::size_t C = m.config().latent_dim;
  ForwardResult r;
  NodeState s;
  s.h = embed(m, g.features, opts);
  s.p = Var::constant(Matrix::Zero(static_cast<Eigen::Index>(g.node_count), static_cast<Eigen::Index>(3 * C)));
  if (opts.keep_trace) {
    r.trace.h.push_back(s.h.value());
    r.trace.p.push_back(s.p.value());
  }
  for (std::size_t l = 0; l < m.config().num_layers; ++l) {
    Var attn;
    s = gat_layer(m, l, s, g, opts.keep_trace ? &attn : nullptr);
    if (opts.keep_trace) {
      r.trace.h.push_back(s.h.value());
      r.trace.p.push_back(s.p.value());
      r.trace.attention.push_back(attn.value());
    }
  }
  const PooledState pooled = residue_pool(m, s, g);
  if (opts.keep_trace) r.trace.pool_weights = pooled.beta.value();
  r.logits = decode(m, pooled);
  r.probabilities = r.logits.value().unaryExpr([](double z) { return sigmoid_scalar(z); });
  return r;
}

}  // namespace egat
