#include "egat/node_features.hpp"

#include "egat/dssp.hpp"
#include "egat/error.hpp"

#include <algorithm>

namespace egat {

NodeFeatures encode_node_features(const Structure& s, std::span<const SecondaryStructure> ss,
                                  std::span<const double> rsa, const FeatureConfig& cfg,
                                  std::optional<std::size_t> expected_dim) {
  const std::size_t dim = cfg.dimension();
  if (expected_dim && *expected_dim != dim)
    fail(ErrorCode::DimensionMismatch, "feature dimension " + std::to_string(dim) +
                                           " does not match expected " + std::to_string(*expected_dim));
  if (ss.size() != s.residue_count() || rsa.size() != s.residue_count())
    fail(ErrorCode::ShapeMismatch, "secondary structure / RSA do not cover every residue");

  NodeFeatures f;
  f.atom_count = s.atom_count();
  f.dim = dim;
  f.data.assign(f.atom_count * dim, 0.0);
  f.config_hash = cfg.content_hash();

  s.for_each_residue([&](const Residue& r) {
    const std::size_t res_slot = cfg.residue_offset() + cfg.residue_slot(r.residue_name);
    const std::size_t ss_slot = cfg.ss_offset() + static_cast<std::size_t>(ss[r.index]);
    const double rsa_value = std::clamp(rsa[r.index], 0.0, 1.0);
    for (const auto& a : r.atoms) {
      double* row = f.data.data() + a.index * dim;
      row[cfg.element_offset() + cfg.element_slot(a.element)] = 1.0;
      row[res_slot] = 1.0;
      row[cfg.atom_name_offset() + cfg.atom_name_slot(a.name)] = 1.0;
      row[ss_slot] = 1.0;
      row[cfg.rsa_offset()] = rsa_value;
    }
  });
  return f;
}

std::vector<double> residue_rsa(const Structure& s, std::span<const double> atom_sasa,
                                const FeatureConfig& cfg) {
  const std::vector<double> per_residue = residue_sasa(s, atom_sasa);
  std::vector<double> out(per_residue.size(), 0.0);
  s.for_each_residue(
      [&](const Residue& r) { out[r.index] = compute_rsa(per_residue[r.index], r.residue_name, cfg); });
  return out;
}

NodeFeatures compute_node_features(const Structure& s, const FeatureConfig& cfg, SasaFrame frame,
                                   std::optional<std::size_t> expected_dim) {
  const auto ss = assign_secondary_structure(s);
  const auto sasa = compute_sasa(s, cfg, frame);
  const auto rsa = residue_rsa(s, sasa, cfg);
  return encode_node_features(s, ss, rsa, cfg, expected_dim);
}

}  // namespace egat
