#include "egat/pdb.hpp"

#include "egat/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace egat {
namespace {

std::string_view field(std::string_view line, std::size_t begin, std::size_t width) {
  if (begin >= line.size()) return {};
  return line.substr(begin, std::min(width, line.size() - begin));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  std::string buf(s);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && std::isfinite(out);
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  fail(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + what);
}

bool is_two_letter_element(std::string_view sym) {
  static constexpr std::string_view kTwoLetter[] = {"FE", "ZN", "MG", "CA", "NA", "CL", "BR", "SE",
                                                    "MN", "CU", "CO", "NI", "CD", "HG", "LI", "AL",
                                                    "SI", "AS", "SR", "BA", "CS", "RB", "PT", "AU"};
  return std::find(std::begin(kTwoLetter), std::end(kTwoLetter), sym) != std::end(kTwoLetter);
}

// Element from the raw 4-column atom-name field: columns 13-14 hold the
// right-justified element symbol.
std::string infer_element(std::string_view raw_name, bool is_hetero) {
  std::string raw(raw_name);
  raw.resize(4, ' ');
  const auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  if (!alpha(raw[0])) {
    for (std::size_t i = 1; i < raw.size(); ++i)
      if (alpha(raw[i])) return upper(std::string_view(&raw[i], 1));
    return {};
  }
  const std::string two = upper(std::string_view(raw.data(), 2));
  const std::size_t name_len = trim(raw).size();
  if (alpha(raw[1]) && is_two_letter_element(two) && (is_hetero || name_len <= 2)) return two;
  return upper(std::string_view(raw.data(), 1));
}

}  // namespace

const char* polymer_kind_name(PolymerKind kind) {
  switch (kind) {
    case PolymerKind::Protein: return "protein";
    case PolymerKind::Nucleic: return "nucleic";
    case PolymerKind::Other: return "other";
  }
  return "other";
}

Structure parse_pdb(std::string_view text, std::string id) {
  Structure s;
  s.id = std::move(id);
  bool saw_model = false;
  bool saw_atom_record = false;
  int last_serial = 0;

  std::map<char, std::size_t> chain_slot;
  std::map<std::tuple<char, int, char>, std::size_t> residue_slot;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    const std::string_view rec = field(line, 0, 6);
    if (rec.substr(0, std::min<std::size_t>(5, rec.size())) == "MODEL") {
      if (saw_model) break;
      saw_model = true;
      int number = 1;
      if (parse_int(field(line, 10, 4), number)) s.model_number = number;
      continue;
    }
    if (rec.substr(0, std::min<std::size_t>(6, rec.size())) == "ENDMDL") break;
    if (trim(rec) == "END") break;

    const bool is_atom = rec == "ATOM  " || rec == "ATOM";
    const bool is_hetatm = rec == "HETATM";
    if (!is_atom && !is_hetatm) continue;

    if (line.size() < 54) malformed(line_no, "record shorter than coordinate columns");

    const char alt_loc = line[16];
    if (alt_loc != ' ' && alt_loc != 'A') continue;

    Atom atom;
    atom.is_hetero = is_hetatm;
    if (!parse_int(field(line, 6, 5), atom.serial)) atom.serial = last_serial + 1;
    last_serial = atom.serial;

    const std::string_view raw_name = field(line, 12, 4);
    atom.name = std::string(trim(raw_name));
    if (atom.name.empty()) malformed(line_no, "blank atom name");

    double x = 0, y = 0, z = 0;
    if (!parse_real(field(line, 30, 8), x) || !parse_real(field(line, 38, 8), y) ||
        !parse_real(field(line, 46, 8), z))
      malformed(line_no, "unparsable coordinates");
    atom.pos = Vec3(x, y, z);

    const std::string_view occ = trim(field(line, 54, 6));
    if (!occ.empty() && !parse_real(occ, atom.occupancy)) malformed(line_no, "unparsable occupancy");
    const std::string_view bfac = trim(field(line, 60, 6));
    if (!bfac.empty() && !parse_real(bfac, atom.bfactor)) malformed(line_no, "unparsable B-factor");

    std::string element = upper(trim(field(line, 76, 2)));
    if (element.empty() || !std::isalpha(static_cast<unsigned char>(element[0])))
      element = infer_element(raw_name, is_hetatm);
    if (element.empty()) malformed(line_no, "cannot infer element");
    atom.element = std::move(element);

    const std::string residue_name(trim(field(line, 17, 4)));
    const char chain_id = line[21];
    int residue_id = 0;
    if (!parse_int(field(line, 22, 4), residue_id)) malformed(line_no, "unparsable residue number");
    const char icode = line.size() > 26 ? line[26] : ' ';

    auto [cit, chain_new] = chain_slot.try_emplace(chain_id, s.chains.size());
    if (chain_new) s.chains.push_back(Chain{chain_id, {}});
    Chain& chain = s.chains[cit->second];

    auto key = std::make_tuple(chain_id, residue_id, icode);
    auto [rit, res_new] = residue_slot.try_emplace(key, chain.residues.size());
    if (res_new) {
      Residue r;
      r.chain_id = chain_id;
      r.residue_id = residue_id;
      r.insertion_code = icode;
      r.residue_name = residue_name;
      chain.residues.push_back(std::move(r));
    }
    chain.residues[rit->second].atoms.push_back(std::move(atom));
    if (is_atom) saw_atom_record = true;
  }

  if (!saw_atom_record) fail(ErrorCode::EmptyStructure, "no ATOM records in input");
  s.reindex();
  return s;
}

Structure read_pdb_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_pdb(ss.str(), stem);
}

std::vector<ChainSummary> detect_chains(const Structure& s) {
  std::vector<ChainSummary> out;
  for (const auto& chain : s.chains) {
    std::size_t protein = 0, nucleic = 0, other = 0;
    for (const auto& r : chain.residues) {
      if (is_water(r.residue_name)) continue;
      if (is_amino_acid(r.residue_name))
        ++protein;
      else if (is_nucleotide(r.residue_name))
        ++nucleic;
      else
        ++other;
    }
    ChainSummary summary;
    summary.chain_id = chain.chain_id;
    summary.residue_count = protein + nucleic + other;
    if (summary.residue_count == 0) {
      summary.residue_count = chain.residues.size();
      summary.kind = PolymerKind::Other;
    } else if (protein >= nucleic && protein >= other) {
      summary.kind = PolymerKind::Protein;
    } else if (nucleic >= other) {
      summary.kind = PolymerKind::Nucleic;
    } else {
      summary.kind = PolymerKind::Other;
    }
    out.push_back(summary);
  }
  return out;
}

std::string format_atom_record(const Atom& atom, const Residue& residue, double bfactor) {
  std::string name_field;
  if (atom.name.size() >= 4 ||
      (atom.element.size() == 2 && atom.name.compare(0, 2, atom.element) == 0))
    name_field = atom.name;
  else
    name_field = " " + atom.name;

  char buf[128];
  std::snprintf(buf, sizeof buf, "%-6s%5d %-4.4s%c%3.3s %c%4d%c   %8.3f%8.3f%8.3f%6.2f%6.2f          %2.2s",
                atom.is_hetero ? "HETATM" : "ATOM", atom.serial % 100000, name_field.c_str(), ' ',
                residue.residue_name.c_str(), residue.chain_id, residue.residue_id,
                residue.insertion_code, atom.pos.x(), atom.pos.y(), atom.pos.z(), atom.occupancy,
                bfactor, atom.element.c_str());
  return buf;
}

std::string write_bfactor_pdb(const Structure& s, std::span<const double> per_atom_prob) {
  if (per_atom_prob.size() < s.atom_count())
    fail(ErrorCode::MissingProbability, "probability vector shorter than atom count");
  std::string out;
  out.reserve(s.atom_count() * 81 + 64);
  for (const auto& chain : s.chains) {
    for (const auto& r : chain.residues) {
      for (const auto& a : r.atoms) {
        const double p = per_atom_prob[a.index];
        if (std::isnan(p))
          fail(ErrorCode::MissingProbability, "atom " + std::to_string(a.serial) + " has no probability");
        if (p < 0.0 || p > 1.0)
          fail(ErrorCode::InvalidArgument, "probability outside [0,1] for atom " + std::to_string(a.serial));
        out += format_atom_record(a, r, p);
        out += '\n';
      }
    }
    out += "TER\n";
  }
  out += "END\n";
  return out;
}

}  // namespace egat
