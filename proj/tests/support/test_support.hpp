#pragma once

#include "egat/dssp.hpp"
#include "egat/model.hpp"
#include "egat/pdb.hpp"
#include "egat/structure.hpp"

#include <Eigen/Geometry>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#ifndef EGAT_SOURCE_DIR
#define EGAT_SOURCE_DIR "."
#endif

namespace egat::test {

inline std::string source_path(const std::string& rel) { return std::string(EGAT_SOURCE_DIR) + "/" + rel; }

inline std::string structure_path(const std::string& id) { return source_path("data/structures/" + id + ".pdb"); }

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "egat_test_XXXXXX").string();
    path_ = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_translation(std::mt19937_64& rng, double scale = 20.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

inline Structure transformed(Structure s, const Eigen::Matrix3d& r, const Vec3& t) {
  for (auto& c : s.chains)
    for (auto& res : c.residues)
      for (auto& a : res.atoms) a.pos = r * a.pos + t;
  return s;
}

inline Atom make_atom(int serial, const std::string& name, const std::string& element, const Vec3& pos) {
  Atom a;
  a.serial = serial;
  a.name = name;
  a.element = element;
  a.pos = pos;
  return a;
}

inline Residue make_residue(char chain, int id, const std::string& name, std::vector<Atom> atoms,
                            bool hetero = false) {
  Residue r;
  r.chain_id = chain;
  r.residue_id = id;
  r.residue_name = name;
  for (auto& a : atoms) a.is_hetero = hetero;
  r.atoms = std::move(atoms);
  return r;
}

inline Structure make_structure(std::vector<Residue> residues, const std::string& id = "test") {
  Structure s;
  s.id = id;
  for (auto& r : residues) {
    if (s.chains.empty() || s.chains.back().chain_id != r.chain_id) {
      Chain c;
      c.chain_id = r.chain_id;
      s.chains.push_back(std::move(c));
    }
    s.chains.back().residues.push_back(std::move(r));
  }
  s.reindex();
  return s;
}

// First `n` residues of chain A of a bundled structure.
inline Structure leading_residues(const std::string& id, std::size_t n, char chain = 'A') {
  Structure full = read_pdb_file(structure_path(id));
  Structure out;
  out.id = id;
  for (const auto& c : full.chains) {
    if (c.chain_id != chain) continue;
    Chain kept;
    kept.chain_id = chain;
    for (const auto& r : c.residues) {
      if (kept.residues.size() == n) break;
      if (is_amino_acid(r.residue_name)) kept.residues.push_back(r);
    }
    out.chains.push_back(std::move(kept));
  }
  out.reindex();
  return out;
}

// Reduced architecture for fast checks; same structure as the default.
inline ModelConfig small_config(std::size_t latent = 8) {
  ModelConfig c;
  c.latent_dim = latent;
  c.embed_hidden = {16, 16};
  c.decoder_hidden = {16, 8};
  return c;
}

// Frozen reference secondary structure: one "chain resid icode letter" line
// per residue, icode "-" when absent.
using ResidueKey = std::tuple<char, int, char>;

inline std::map<ResidueKey, char> read_dssp_reference(const std::string& path) {
  std::map<ResidueKey, char> out;
  std::istringstream in(read_text(path));
  std::string chain, icode, letter;
  int resid = 0;
  while (in >> chain >> resid >> icode >> letter)
    out[{chain[0], resid, icode == "-" ? ' ' : icode[0]}] = letter[0];
  return out;
}

// Fraction of reference residues whose computed class letter matches.
inline double dssp_agreement(const Structure& s, const std::map<ResidueKey, char>& ref,
                             std::size_t* compared = nullptr) {
  const auto ss = assign_secondary_structure(s);
  std::size_t n = 0, same = 0;
  s.for_each_residue([&](const Residue& r) {
    const auto it = ref.find({r.chain_id, r.residue_id, r.insertion_code});
    if (it == ref.end()) return;
    ++n;
    if (ss_letter(ss[r.index]) == it->second) ++same;
  });
  if (compared) *compared = n;
  return n == 0 ? 0.0 : static_cast<double>(same) / static_cast<double>(n);
}

}  // namespace egat::test
