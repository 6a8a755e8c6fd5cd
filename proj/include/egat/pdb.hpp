#pragma once

#include "egat/structure.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace egat {

// Parses PDB fixed-column text. Keeps MODEL 1 only, altLoc ' ' or 'A' only.
// Throws MalformedRecord or EmptyStructure.
Structure parse_pdb(std::string_view text, std::string id = {});

Structure read_pdb_file(const std::string& path);

enum class PolymerKind { Protein, Nucleic, Other };

const char* polymer_kind_name(PolymerKind kind);

struct ChainSummary {
  char chain_id = ' ';
  std::size_t residue_count = 0;
  PolymerKind kind = PolymerKind::Other;
};

// Waters are ignored for both the count and the majority vote unless the chain
// contains nothing else.
std::vector<ChainSummary> detect_chains(const Structure& s);

// Writes the structure with the B-factor column replaced by per-atom values,
// indexed by Atom::index. NaN marks a missing value (MissingProbability).
std::string write_bfactor_pdb(const Structure& s, std::span<const double> per_atom_prob);

// Fixed-column ATOM/HETATM line for one atom with the given B-factor.
std::string format_atom_record(const Atom& atom, const Residue& residue, double bfactor);

}  // namespace egat
