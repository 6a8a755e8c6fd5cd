#include "egat/structure.hpp"

#include "egat/error.hpp"

#include <algorithm>
#include <array>

namespace egat {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EmptyStructure: return "EmptyStructure";
    case ErrorCode::MissingProbability: return "MissingProbability";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateCoordinates: return "DegenerateCoordinates";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DisconnectedLoss: return "DisconnectedLoss";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::ConfigHashMismatch: return "ConfigHashMismatch";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::NoSelectedChain: return "NoSelectedChain";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

const Atom* Residue::find_atom(std::string_view name) const {
  for (const auto& a : atoms)
    if (a.name == name) return &a;
  return nullptr;
}

std::string Residue::label() const {
  std::string s = std::to_string(residue_id);
  if (has_insertion_code()) s.push_back(insertion_code);
  return s;
}

std::size_t Structure::atom_count() const {
  std::size_t n = 0;
  for (const auto& c : chains)
    for (const auto& r : c.residues) n += r.atoms.size();
  return n;
}

std::size_t Structure::residue_count() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.residues.size();
  return n;
}

void Structure::reindex() {
  std::size_t atom_i = 0;
  std::size_t res_i = 0;
  for (auto& c : chains) {
    for (auto& r : c.residues) {
      r.index = res_i++;
      r.chain_id = c.chain_id;
      for (auto& a : r.atoms) a.index = atom_i++;
    }
  }
}

void Structure::for_each_residue(const std::function<void(const Residue&)>& fn) const {
  for (const auto& c : chains)
    for (const auto& r : c.residues) fn(r);
}

void Structure::for_each_atom(const std::function<void(const Atom&)>& fn) const {
  for (const auto& c : chains)
    for (const auto& r : c.residues)
      for (const auto& a : r.atoms) fn(a);
}

std::vector<Vec3> Structure::positions() const {
  std::vector<Vec3> out;
  out.reserve(atom_count());
  for_each_atom([&](const Atom& a) { out.push_back(a.pos); });
  return out;
}

const Chain* Structure::find_chain(char chain_id) const {
  for (const auto& c : chains)
    if (c.chain_id == chain_id) return &c;
  return nullptr;
}

namespace {

constexpr std::array<std::string_view, 20> kStandardAminoAcids = {
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE",
    "LEU", "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL"};

// Common modified residues that stay part of the polypeptide.
constexpr std::array<std::string_view, 16> kModifiedAminoAcids = {
    "MSE", "SEP", "TPO", "PTR", "HYP", "MLY", "CSO", "CME", "KCX", "LLP",
    "PCA", "SEC", "PYL", "CSD", "HID", "HIE"};

constexpr std::array<std::string_view, 10> kNucleotides = {"A",  "C",  "G",  "U",  "DA",
                                                           "DC", "DG", "DT", "I",  "DI"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& table, std::string_view name) {
  return std::find(table.begin(), table.end(), name) != table.end();
}

}  // namespace

bool is_standard_amino_acid(std::string_view residue_name) {
  return contains(kStandardAminoAcids, residue_name);
}

bool is_amino_acid(std::string_view residue_name) {
  return is_standard_amino_acid(residue_name) || contains(kModifiedAminoAcids, residue_name);
}

bool is_nucleotide(std::string_view residue_name) { return contains(kNucleotides, residue_name); }

bool is_water(std::string_view residue_name) {
  return residue_name == "HOH" || residue_name == "DOD" || residue_name == "WAT";
}

}  // namespace egat
