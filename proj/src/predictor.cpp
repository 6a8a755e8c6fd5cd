#include "egat/predictor.hpp"

#include "egat/error.hpp"

namespace egat {

PreparedSubunit prepare_subunit(Structure subunit, const FeatureConfig& cfg, int k, double cutoff,
                                SasaFrame frame) {
  PreparedSubunit p;
  p.structure = std::move(subunit);
  p.structure.reindex();
  p.features = compute_node_features(p.structure, cfg, frame);
  p.graph = build_graph(p.structure, k, cutoff);
  p.input = make_graph_input(p.graph, p.features);
  return p;
}

FeatureConfig model_feature_config(const Model& m) {
  if (m.feature_config_json.empty()) return FeatureConfig::defaults();
  return FeatureConfig::from_json(m.feature_config_json);
}

PredictionResult predict_subunit(const Model& m, Structure subunit, SasaFrame frame) {
  const FeatureConfig cfg = model_feature_config(m);
  if (cfg.dimension() != m.config().input_dim)
    fail(ErrorCode::DimensionMismatch, "feature config dimension does not match the model");
  PreparedSubunit prep = prepare_subunit(std::move(subunit), cfg, m.config().k, m.config().cutoff, frame);

  ForwardResult fr;
  {
    NoGradGuard no_grad;
    fr = forward(m, prep.input);
  }

  PredictionResult out;
  out.structure_id = prep.structure.id;
  out.residues.resize(prep.structure.residue_count());
  for (auto& v : out.per_atom) v.assign(prep.structure.atom_count(), 0.0);
  prep.structure.for_each_residue([&](const Residue& r) {
    ResiduePrediction& rp = out.residues[r.index];
    rp.chain_id = r.chain_id;
    rp.residue_id = r.residue_id;
    rp.insertion_code = r.insertion_code;
    rp.residue_name = r.residue_name;
    for (std::size_t c = 0; c < kNumBindingClasses; ++c) {
      rp.mean_probability[c] = fr.probabilities(static_cast<Eigen::Index>(r.index), static_cast<Eigen::Index>(c));
      for (const auto& a : r.atoms) out.per_atom[c][a.index] = rp.mean_probability[c];
    }
  });
  out.subunit = std::move(prep.structure);
  return out;
}

PredictionResult predict_structure(const Model& m, const Structure& complex, const std::vector<char>& chains) {
  Subunit su = split_subunit(complex, chains);
  return predict_subunit(m, std::move(su.structure));
}

}  // namespace egat
