#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace egat {

using Vec3 = Eigen::Vector3d;

struct Atom {
  int serial = 0;
  std::string name;     // trimmed, e.g. "CA"
  std::string element;  // upper case, e.g. "C", "SE"
  Vec3 pos = Vec3::Zero();
  double occupancy = 1.0;
  double bfactor = 0.0;
  bool is_hetero = false;
  // Ordinal of the atom within its Structure; maintained by Structure::reindex().
  std::size_t index = 0;
};

struct Residue {
  char chain_id = ' ';
  int residue_id = 0;
  char insertion_code = ' ';  // ' ' means none
  std::string residue_name;
  std::vector<Atom> atoms;
  // Ordinal of the residue within its Structure; maintained by Structure::reindex().
  std::size_t index = 0;

  const Atom* find_atom(std::string_view name) const;
  bool has_insertion_code() const { return insertion_code != ' '; }
  // "41" or "52A"
  std::string label() const;
};

struct Chain {
  char chain_id = ' ';
  std::vector<Residue> residues;
};

struct Structure {
  std::string id;
  int model_number = 1;
  std::vector<Chain> chains;

  std::size_t atom_count() const;
  std::size_t residue_count() const;

  // Recomputes Atom::index and Residue::index in file order.
  void reindex();

  void for_each_residue(const std::function<void(const Residue&)>& fn) const;
  void for_each_atom(const std::function<void(const Atom&)>& fn) const;
  std::vector<Vec3> positions() const;

  const Chain* find_chain(char chain_id) const;
};

// Residue-name tables shared by chain detection and partner classification.
bool is_amino_acid(std::string_view residue_name);
bool is_standard_amino_acid(std::string_view residue_name);
bool is_nucleotide(std::string_view residue_name);
bool is_water(std::string_view residue_name);

}  // namespace egat
