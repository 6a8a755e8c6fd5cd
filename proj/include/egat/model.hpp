#pragma once

#include "egat/atom_graph.hpp"
#include "egat/autodiff.hpp"
#include "egat/node_features.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace egat {

struct ModelConfig {
  std::size_t input_dim = 80;
  std::size_t latent_dim = 32;
  std::size_t num_layers = 4;
  std::vector<std::size_t> embed_hidden{64, 64};
  std::vector<std::size_t> decoder_hidden{64, 32};
  std::size_t num_classes = 5;
  double leaky_slope = 0.2;
  double dropout = 0.1;
  int k = kDefaultNeighbors;
  double cutoff = kDefaultCutoff;

  // Invariant scalars per edge fed to attention: d, u.pi_i, u.pi_j, pi_i.pi_j.
  static constexpr std::size_t kEdgeFeatures = 4;
  std::size_t attention_dim() const { return 2 * latent_dim + kEdgeFeatures; }
};

// Everything forward() needs about one subunit. Vector quantities use the
// component-major layout: column k*C + c holds component k of channel c.
struct GraphInput {
  std::size_t node_count = 0;
  std::size_t residue_count = 0;
  Matrix features;                    // N x D
  Index src, dst;                     // edge j -> i as (src = j, dst = i)
  Matrix dist;                        // E x 1
  std::shared_ptr<const Matrix> dir;  // E x 3, u_ij
  Index residue;                      // per node
  std::string config_hash;

  std::size_t edge_count() const { return src ? src->size() : 0; }
};

GraphInput make_graph_input(const AtomGraph& g, const NodeFeatures& f);

// Model parameters. Each layer has its own weights; nothing is shared.
class Model {
 public:
  // Glorot-uniform weights, zero biases, q_pool ~ N(0, 0.1). Values are
  // rounded to float32 so that checkpoints reproduce them bit-exactly.
  static Model initialize(const ModelConfig& config, std::uint64_t seed);
  // Empty model with the given shapes; every array zero.
  static Model zeros(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // Parameter names in canonical order.
  const std::vector<std::string>& names() const { return names_; }
  std::vector<Var>& parameters() { return params_; }
  const std::vector<Var>& parameters() const { return params_; }
  Var& param(const std::string& name);
  const Var& param(const std::string& name) const;
  std::size_t parameter_count() const;
  void zero_grad();

  // Feature configuration the model was trained against.
  std::string feature_config_json;
  std::string feature_config_hash;
  std::int64_t step = 0;

 private:
  void add(const std::string& name, std::size_t rows, std::size_t cols);

  ModelConfig config_;
  std::vector<std::string> names_;
  std::vector<Var> params_;
  std::map<std::string, std::size_t> index_;
};

struct NodeState {
  Var h;  // N x C
  Var p;  // N x 3C
};

struct ForwardOptions {
  bool training = false;        // enables embedding dropout
  std::mt19937_64* rng = nullptr;  // required when training with dropout > 0
  bool keep_trace = false;
};

struct ForwardTrace {
  std::vector<Matrix> h;          // per layer, including the embedding (index 0)
  std::vector<Matrix> p;
  std::vector<Matrix> attention;  // per GAT layer, E x 1
  Matrix pool_weights;            // N x 1
};

struct ForwardResult {
  Var logits;           // R x classes
  Matrix probabilities; // R x classes
  ForwardTrace trace;
};

// Individual stages, exposed for testing.
Var embed(const Model& m, const Matrix& features, const ForwardOptions& opts = {});
Var attention_coefficients(const Model& m, std::size_t layer, const NodeState& s, const GraphInput& g);
NodeState gat_layer(const Model& m, std::size_t layer, const NodeState& s, const GraphInput& g,
                    Var* attention_out = nullptr);
struct PooledState {
  Var q;     // R x C
  Var p;     // R x 3C
  Var beta;  // N x 1
};
PooledState residue_pool(const Model& m, const NodeState& s, const GraphInput& g);
Var decode(const Model& m, const PooledState& pooled);

// embed -> GAT layers -> residue pooling -> decoder. Throws DimensionMismatch
// when the feature width differs from the model and ConfigHashMismatch when
// both hashes are set and differ.
ForwardResult forward(const Model& m, const GraphInput& g, const ForwardOptions& opts = {});

}  // namespace egat
