#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace egat {

enum class SecondaryStructure : unsigned char { H = 0, G, I, E, B, T, S, C };

inline constexpr std::size_t kNumSsClasses = 8;
char ss_letter(SecondaryStructure ss);

// Categorical vocabularies, SASA settings and the max-ASA table. Fixes the
// node-feature dimensionality; immutable once a model is trained against it.
struct FeatureConfig {
  std::vector<std::string> element_vocab;    // last entry is "other"
  std::vector<std::string> residue_vocab;    // last entry is "UNK"
  std::vector<std::string> atom_name_vocab;  // last entry is "other"
  std::array<char, kNumSsClasses> ss_classes{'H', 'G', 'I', 'E', 'B', 'T', 'S', 'C'};
  std::map<std::string, double> max_asa;
  std::map<std::string, double> vdw_radius;
  double default_vdw_radius = 1.70;
  double probe_radius = 1.4;
  int sphere_points = 92;

  static FeatureConfig defaults();
  static FeatureConfig from_json(const std::string& text);
  static FeatureConfig load(const std::string& path);
  std::string to_json() const;

  // Throws InvalidArgument on empty/duplicate vocabularies or bad SASA settings.
  void validate() const;

  // |element| + |residue| + |atom name| + 8 + 1
  std::size_t dimension() const;
  std::size_t element_offset() const { return 0; }
  std::size_t residue_offset() const { return element_vocab.size(); }
  std::size_t atom_name_offset() const { return residue_offset() + residue_vocab.size(); }
  std::size_t ss_offset() const { return atom_name_offset() + atom_name_vocab.size(); }
  std::size_t rsa_offset() const { return ss_offset() + kNumSsClasses; }

  // Index into each vocabulary; unknown symbols map to the trailing slot.
  std::size_t element_slot(const std::string& element) const;
  std::size_t residue_slot(const std::string& residue_name) const;
  std::size_t atom_name_slot(const std::string& atom_name) const;

  double radius_for(const std::string& element) const;
  double max_asa_for(const std::string& residue_name) const;

  // Hex CRC-32 of the canonical JSON serialization.
  std::string content_hash() const;
};

}  // namespace egat
