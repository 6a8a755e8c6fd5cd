#pragma once

#include "egat/feature_config.hpp"
#include "egat/sasa.hpp"
#include "egat/structure.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace egat {

// Row-major per-atom feature matrix, rows indexed by Atom::index.
struct NodeFeatures {
  std::size_t atom_count = 0;
  std::size_t dim = 0;
  std::vector<double> data;
  std::string config_hash;

  const double* row(std::size_t atom) const { return data.data() + atom * dim; }
  double at(std::size_t atom, std::size_t col) const { return data[atom * dim + col]; }
};

// ss and rsa are indexed by Residue::index. When expected_dim is set and the
// config dimension differs, throws DimensionMismatch.
NodeFeatures encode_node_features(const Structure& s, std::span<const SecondaryStructure> ss,
                                  std::span<const double> rsa, const FeatureConfig& cfg,
                                  std::optional<std::size_t> expected_dim = std::nullopt);

// Per-residue RSA from per-atom SASA.
std::vector<double> residue_rsa(const Structure& s, std::span<const double> atom_sasa,
                                const FeatureConfig& cfg);

// DSSP + SASA + RSA + encoding in one call.
NodeFeatures compute_node_features(const Structure& s, const FeatureConfig& cfg,
                                   SasaFrame frame = SasaFrame::Global,
                                   std::optional<std::size_t> expected_dim = std::nullopt);

}  // namespace egat
