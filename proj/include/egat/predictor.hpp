#pragma once

#include "egat/atom_graph.hpp"
#include "egat/feature_config.hpp"
#include "egat/model.hpp"
#include "egat/node_features.hpp"
#include "egat/partners.hpp"
#include "egat/residue_table.hpp"
#include "egat/sasa.hpp"

#include <string>
#include <vector>

namespace egat {

// Features, graph and model input for one subunit.
struct PreparedSubunit {
  Structure structure;
  NodeFeatures features;
  AtomGraph graph;
  GraphInput input;
};

PreparedSubunit prepare_subunit(Structure subunit, const FeatureConfig& cfg, int k, double cutoff,
                                SasaFrame frame = SasaFrame::Global);

struct PredictionResult {
  std::string structure_id;
  Structure subunit;
  std::vector<ResiduePrediction> residues;  // by Residue::index
  // Per-atom probability per class (residue value broadcast to its atoms),
  // indexed [class][Atom::index].
  std::array<std::vector<double>, kNumBindingClasses> per_atom;
};

// The feature configuration stored with the model, or the defaults when the
// model carries none.
FeatureConfig model_feature_config(const Model& m);

PredictionResult predict_subunit(const Model& m, Structure subunit, SasaFrame frame = SasaFrame::Global);

// Splits `complex` by `chains` (empty = all protein chains) and predicts.
PredictionResult predict_structure(const Model& m, const Structure& complex, const std::vector<char>& chains);

}  // namespace egat
