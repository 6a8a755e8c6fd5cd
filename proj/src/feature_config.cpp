#include "egat/feature_config.hpp"

#include "egat/error.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace egat {

char ss_letter(SecondaryStructure ss) {
  static constexpr char kLetters[] = {'H', 'G', 'I', 'E', 'B', 'T', 'S', 'C'};
  return kLetters[static_cast<std::size_t>(ss)];
}

FeatureConfig FeatureConfig::defaults() {
  FeatureConfig cfg;
  cfg.element_vocab = {"C", "N", "O", "S", "P", "SE", "H", "FE", "ZN", "MG", "CA", "other"};
  cfg.residue_vocab = {"ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE", "LEU",
                       "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL", "UNK"};
  cfg.atom_name_vocab = {"N",   "CA",  "C",   "CB",  "O",   "CG",  "CG1", "CG2", "OG",  "OG1",
                         "SG",  "CD",  "CD1", "CD2", "ND1", "ND2", "OD1", "OD2", "SD",  "CE",
                         "CE1", "CE2", "CE3", "NE",  "NE1", "NE2", "OE1", "OE2", "CH2", "NH1",
                         "NH2", "OH",  "CZ",  "CZ2", "CZ3", "NZ",  "OXT", "other"};
  // Theoretical maximum accessible surface areas (Tien et al. 2013), in A^2.
  cfg.max_asa = {{"ALA", 129.0}, {"ARG", 274.0}, {"ASN", 195.0}, {"ASP", 193.0}, {"CYS", 167.0},
                 {"GLN", 225.0}, {"GLU", 223.0}, {"GLY", 104.0}, {"HIS", 224.0}, {"ILE", 197.0},
                 {"LEU", 201.0}, {"LYS", 236.0}, {"MET", 224.0}, {"PHE", 240.0}, {"PRO", 159.0},
                 {"SER", 155.0}, {"THR", 172.0}, {"TRP", 285.0}, {"TYR", 263.0}, {"VAL", 174.0}};
  cfg.vdw_radius = {{"C", 1.70}, {"N", 1.55}, {"O", 1.52}, {"S", 1.80},
                    {"P", 1.80}, {"H", 1.20}, {"SE", 1.90}};
  cfg.default_vdw_radius = 1.70;
  cfg.probe_radius = 1.4;
  cfg.sphere_points = 92;
  return cfg;
}

std::string FeatureConfig::to_json() const {
  nlohmann::json j;
  j["element_vocab"] = element_vocab;
  j["residue_vocab"] = residue_vocab;
  j["atom_name_vocab"] = atom_name_vocab;
  j["ss_classes"] = std::string(ss_classes.begin(), ss_classes.end());
  j["max_asa"] = max_asa;
  j["vdw_radius"] = vdw_radius;
  j["default_vdw_radius"] = default_vdw_radius;
  j["probe_radius"] = probe_radius;
  j["sphere_points"] = sphere_points;
  return j.dump();
}

FeatureConfig FeatureConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("feature config: ") + e.what());
  }
  FeatureConfig cfg = defaults();
  try {
    if (j.contains("element_vocab")) cfg.element_vocab = j.at("element_vocab").get<std::vector<std::string>>();
    if (j.contains("residue_vocab")) cfg.residue_vocab = j.at("residue_vocab").get<std::vector<std::string>>();
    if (j.contains("atom_name_vocab"))
      cfg.atom_name_vocab = j.at("atom_name_vocab").get<std::vector<std::string>>();
    if (j.contains("ss_classes")) {
      const auto s = j.at("ss_classes").get<std::string>();
      if (s.size() != kNumSsClasses) fail(ErrorCode::InvalidArgument, "ss_classes must have 8 letters");
      std::copy(s.begin(), s.end(), cfg.ss_classes.begin());
    }
    if (j.contains("max_asa")) cfg.max_asa = j.at("max_asa").get<std::map<std::string, double>>();
    if (j.contains("vdw_radius")) cfg.vdw_radius = j.at("vdw_radius").get<std::map<std::string, double>>();
    if (j.contains("default_vdw_radius")) cfg.default_vdw_radius = j.at("default_vdw_radius").get<double>();
    if (j.contains("probe_radius")) cfg.probe_radius = j.at("probe_radius").get<double>();
    if (j.contains("sphere_points")) cfg.sphere_points = j.at("sphere_points").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("feature config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

FeatureConfig FeatureConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open feature config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void FeatureConfig::validate() const {
  const auto check_vocab = [](const std::vector<std::string>& v, const char* what) {
    if (v.empty()) fail(ErrorCode::InvalidArgument, std::string(what) + " is empty");
    if (std::set<std::string>(v.begin(), v.end()).size() != v.size())
      fail(ErrorCode::InvalidArgument, std::string(what) + " has duplicates");
  };
  check_vocab(element_vocab, "element_vocab");
  check_vocab(residue_vocab, "residue_vocab");
  check_vocab(atom_name_vocab, "atom_name_vocab");
  if (std::set<char>(ss_classes.begin(), ss_classes.end()).size() != kNumSsClasses)
    fail(ErrorCode::InvalidArgument, "ss_classes has duplicates");
  if (!(probe_radius > 0.0)) fail(ErrorCode::InvalidArgument, "probe_radius must be positive");
  if (sphere_points < 1) fail(ErrorCode::InvalidArgument, "sphere_points must be >= 1");
  if (max_asa.empty()) fail(ErrorCode::InvalidArgument, "max_asa table is empty");
  for (const auto& [name, v] : max_asa)
    if (!(v > 0.0)) fail(ErrorCode::InvalidArgument, "max_asa for " + name + " must be positive");
}

std::size_t FeatureConfig::dimension() const {
  return element_vocab.size() + residue_vocab.size() + atom_name_vocab.size() + kNumSsClasses + 1;
}

namespace {
std::size_t slot_in(const std::vector<std::string>& vocab, const std::string& symbol) {
  auto it = std::find(vocab.begin(), vocab.end() - 1, symbol);
  return static_cast<std::size_t>(it - vocab.begin());
}
}  // namespace

std::size_t FeatureConfig::element_slot(const std::string& element) const {
  return slot_in(element_vocab, element);
}
std::size_t FeatureConfig::residue_slot(const std::string& residue_name) const {
  return slot_in(residue_vocab, residue_name);
}
std::size_t FeatureConfig::atom_name_slot(const std::string& atom_name) const {
  return slot_in(atom_name_vocab, atom_name);
}

double FeatureConfig::radius_for(const std::string& element) const {
  auto it = vdw_radius.find(element);
  return it == vdw_radius.end() ? default_vdw_radius : it->second;
}

double FeatureConfig::max_asa_for(const std::string& residue_name) const {
  if (auto it = max_asa.find(residue_name); it != max_asa.end()) return it->second;
  double sum = 0.0;
  for (const auto& [_, v] : max_asa) sum += v;
  return sum / static_cast<double>(max_asa.size());
}

std::string FeatureConfig::content_hash() const {
  const std::string canonical = to_json();
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(canonical.data()),
                          static_cast<uInt>(canonical.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace egat
