#pragma once

#include "egat/structure.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace egat {

inline constexpr std::size_t kNumBindingClasses = 5;

enum class BindingClass { Protein = 0, NucleicAcid = 1, Ion = 2, Ligand = 3, Lipid = 4 };

inline constexpr std::array<BindingClass, kNumBindingClasses> kBindingClasses = {
    BindingClass::Protein, BindingClass::NucleicAcid, BindingClass::Ion,
    BindingClass::Ligand, BindingClass::Lipid};

// Wire names: protein, dna_rna, ion, ligand, lipid.
const char* binding_class_key(BindingClass c);
// Display names: Protein, DNA/RNA, Ion, Ligand, Lipid.
const char* binding_class_label(BindingClass c);
std::optional<BindingClass> parse_binding_class(std::string_view key);

inline std::size_t class_index(BindingClass c) { return static_cast<std::size_t>(c); }

struct ResiduePrediction {
  char chain_id = ' ';
  int residue_id = 0;
  char insertion_code = ' ';
  std::string residue_name;
  std::array<double, kNumBindingClasses> mean_probability{};

  std::string residue_label() const;
};

// Mean of per_atom_prob[a.index] over the residue's atoms.
double residue_mean_probability(std::span<const double> per_atom_prob, const Residue& residue);

// CSV "chain,residue_id,residue_name,mean_probability" with rows p >= threshold,
// sorted by probability descending then chain, residue id, insertion code.
std::string export_residue_csv(std::span<const ResiduePrediction> preds, BindingClass cls,
                               double threshold);

// The rows export_residue_csv would emit, in order.
std::vector<ResiduePrediction> select_binding_residues(std::span<const ResiduePrediction> preds,
                                                       BindingClass cls, double threshold);

}  // namespace egat
