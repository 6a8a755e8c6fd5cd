#include "egat/residue_table.hpp"

#include "egat/error.hpp"

#include <algorithm>
#include <cstdio>

namespace egat {

const char* binding_class_key(BindingClass c) {
  switch (c) {
    case BindingClass::Protein: return "protein";
    case BindingClass::NucleicAcid: return "dna_rna";
    case BindingClass::Ion: return "ion";
    case BindingClass::Ligand: return "ligand";
    case BindingClass::Lipid: return "lipid";
  }
  return "protein";
}

const char* binding_class_label(BindingClass c) {
  switch (c) {
    case BindingClass::Protein: return "Protein";
    case BindingClass::NucleicAcid: return "DNA/RNA";
    case BindingClass::Ion: return "Ion";
    case BindingClass::Ligand: return "Ligand";
    case BindingClass::Lipid: return "Lipid";
  }
  return "Protein";
}

std::optional<BindingClass> parse_binding_class(std::string_view key) {
  for (auto c : kBindingClasses)
    if (key == binding_class_key(c)) return c;
  return std::nullopt;
}

std::string ResiduePrediction::residue_label() const {
  std::string s = std::to_string(residue_id);
  if (insertion_code != ' ') s.push_back(insertion_code);
  return s;
}

double residue_mean_probability(std::span<const double> per_atom_prob, const Residue& residue) {
  if (residue.atoms.empty()) fail(ErrorCode::InvalidArgument, "residue without atoms");
  double sum = 0.0;
  for (const auto& a : residue.atoms) {
    if (a.index >= per_atom_prob.size())
      fail(ErrorCode::MissingProbability, "atom index outside probability vector");
    sum += per_atom_prob[a.index];
  }
  return sum / static_cast<double>(residue.atoms.size());
}

std::vector<ResiduePrediction> select_binding_residues(std::span<const ResiduePrediction> preds,
                                                       BindingClass cls, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    fail(ErrorCode::InvalidArgument, "threshold must lie in [0,1]");
  const std::size_t c = class_index(cls);
  std::vector<ResiduePrediction> rows;
  for (const auto& p : preds)
    if (p.mean_probability[c] >= threshold) rows.push_back(p);
  std::stable_sort(rows.begin(), rows.end(), [c](const ResiduePrediction& a, const ResiduePrediction& b) {
    if (a.mean_probability[c] != b.mean_probability[c])
      return a.mean_probability[c] > b.mean_probability[c];
    if (a.chain_id != b.chain_id) return a.chain_id < b.chain_id;
    if (a.residue_id != b.residue_id) return a.residue_id < b.residue_id;
    return a.insertion_code < b.insertion_code;
  });
  return rows;
}

std::string export_residue_csv(std::span<const ResiduePrediction> preds, BindingClass cls,
                               double threshold) {
  const std::size_t c = class_index(cls);
  std::string out = "chain,residue_id,residue_name,mean_probability\n";
  for (const auto& r : select_binding_residues(preds, cls, threshold)) {
    char prob[32];
    std::snprintf(prob, sizeof prob, "%.4f", r.mean_probability[c]);
    out += r.chain_id;
    out += ',';
    out += r.residue_label();
    out += ',';
    out += r.residue_name;
    out += ',';
    out += prob;
    out += '\n';
  }
  return out;
}

}  // namespace egat
