#pragma once

#include "egat/residue_table.hpp"
#include "egat/structure.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace egat {

enum class PartnerClass { Protein = 0, NucleicAcid, Ion, Ligand, Lipid, Solvent };

const char* partner_class_name(PartnerClass c);

// Solvent has no binding class.
std::optional<BindingClass> to_binding_class(PartnerClass c);

// Residue-name tables behind classify_partner. Amino acids are recognised
// through is_amino_acid().
struct PartnerTables {
  std::set<std::string> nucleotides;
  std::set<std::string> ions;
  std::set<std::string> lipids;
  std::set<std::string> solvents;

  static PartnerTables defaults();
  // Reads the optional "partner_tables" object of a config document; missing
  // keys keep their defaults.
  static PartnerTables from_json(const std::string& text);
  std::string to_json() const;
};

// A chain's polymer part, or a single het group.
struct PartnerEntity {
  std::string description;  // e.g. "chain B" or "ZN B 201"
  PartnerClass cls = PartnerClass::Ligand;
  std::vector<Vec3> atoms;
};

// Polymer entities vote by residue name (ties favour protein); a single het
// group maps through the ion (single-atom only), lipid and solvent tables and
// falls back to ligand.
PartnerClass classify_partner(const std::vector<const Residue*>& residues,
                              const PartnerTables& tables = PartnerTables::defaults());

struct Subunit {
  Structure structure;  // amino-acid residues of the selected chains, reindexed
  std::vector<PartnerEntity> partners;
};

// Splits a complex into the subunit formed by `chains` and its partner
// entities. An empty selection picks every chain detected as protein. Throws
// NoSelectedChain when a requested chain is absent or nothing is selected.
Subunit split_subunit(const Structure& s, const std::vector<char>& chains,
                      const PartnerTables& tables = PartnerTables::defaults());

inline constexpr double kDefaultContactCutoff = 5.0;

// Residue-major N x 5 binary matrix.
struct LabelMatrix {
  std::size_t residue_count = 0;
  std::vector<unsigned char> data;

  unsigned char at(std::size_t residue, std::size_t cls) const {
    return data[residue * kNumBindingClasses + cls];
  }
};

// y_rc = 1 iff an atom of residue r lies within contact_cutoff of an atom of a
// class-c partner. Solvent entities are ignored.
LabelMatrix label_binding_residues(const Structure& subunit, const std::vector<PartnerEntity>& partners,
                                   double contact_cutoff = kDefaultContactCutoff);

}  // namespace egat
