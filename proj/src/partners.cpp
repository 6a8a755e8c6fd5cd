#include "egat/partners.hpp"

#include "egat/error.hpp"
#include "egat/pdb.hpp"
#include "egat/spatial_grid.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>

namespace egat {

const char* partner_class_name(PartnerClass c) {
  switch (c) {
    case PartnerClass::Protein: return "protein";
    case PartnerClass::NucleicAcid: return "dna_rna";
    case PartnerClass::Ion: return "ion";
    case PartnerClass::Ligand: return "ligand";
    case PartnerClass::Lipid: return "lipid";
    case PartnerClass::Solvent: return "solvent";
  }
  return "ligand";
}

std::optional<BindingClass> to_binding_class(PartnerClass c) {
  if (c == PartnerClass::Solvent) return std::nullopt;
  return static_cast<BindingClass>(static_cast<int>(c));
}

PartnerTables PartnerTables::defaults() {
  PartnerTables t;
  t.nucleotides = {"A", "C", "G", "U", "DA", "DC", "DG", "DT", "I", "DI"};
  t.ions = {"ZN", "MG", "CA", "NA", "K", "FE", "FE2", "MN", "CU", "CL", "BR", "IOD", "CD", "NI", "CO", "HG"};
  t.lipids = {"PLM", "OLA", "POP", "PC",  "PE",  "CLR", "CDL", "LDA", "MYR", "PCW", "POV", "PEE",
              "PGW", "LHG", "LMG", "DGD", "SQD", "OLC", "OLB", "STE", "DAO", "UND", "D10", "HEX",
              "CHL", "Y01", "PEF", "PGV", "3PE", "PLC", "EPH", "LPP", "PTY", "BOG", "LMT", "DMU"};
  t.solvents = {"HOH", "DOD"};
  return t;
}

std::string PartnerTables::to_json() const {
  nlohmann::json j;
  j["nucleotides"] = nucleotides;
  j["ions"] = ions;
  j["lipids"] = lipids;
  j["solvents"] = solvents;
  return j.dump();
}

PartnerTables PartnerTables::from_json(const std::string& text) {
  PartnerTables t = defaults();
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.contains("partner_tables")) return t;
    const auto& j = doc.at("partner_tables");
    if (j.contains("nucleotides")) t.nucleotides = j.at("nucleotides").get<std::set<std::string>>();
    if (j.contains("ions")) t.ions = j.at("ions").get<std::set<std::string>>();
    if (j.contains("lipids")) t.lipids = j.at("lipids").get<std::set<std::string>>();
    if (j.contains("solvents")) t.solvents = j.at("solvents").get<std::set<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("partner tables: ") + e.what());
  }
  return t;
}

PartnerClass classify_partner(const std::vector<const Residue*>& residues, const PartnerTables& tables) {
  if (residues.empty()) fail(ErrorCode::InvalidArgument, "partner entity has no residues");
  if (residues.size() == 1) {
    const Residue& r = *residues.front();
    if (tables.solvents.count(r.residue_name)) return PartnerClass::Solvent;
    if (is_amino_acid(r.residue_name)) return PartnerClass::Protein;
    if (tables.nucleotides.count(r.residue_name)) return PartnerClass::NucleicAcid;
    if (tables.ions.count(r.residue_name) && r.atoms.size() == 1) return PartnerClass::Ion;
    if (tables.lipids.count(r.residue_name)) return PartnerClass::Lipid;
    return PartnerClass::Ligand;
  }
  std::size_t protein = 0, nucleic = 0;
  for (const Residue* r : residues) {
    if (is_amino_acid(r->residue_name)) ++protein;
    else if (tables.nucleotides.count(r->residue_name)) ++nucleic;
  }
  if (protein == 0 && nucleic == 0) {
    bool all_solvent = std::all_of(residues.begin(), residues.end(),
                                   [&](const Residue* r) { return tables.solvents.count(r->residue_name) > 0; });
    return all_solvent ? PartnerClass::Solvent : PartnerClass::Ligand;
  }
  return protein >= nucleic ? PartnerClass::Protein : PartnerClass::NucleicAcid;
}

namespace {

bool is_polymer_residue(const Residue& r, const PartnerTables& tables) {
  return is_amino_acid(r.residue_name) || tables.nucleotides.count(r.residue_name) > 0;
}

}  // namespace

Subunit split_subunit(const Structure& s, const std::vector<char>& chains, const PartnerTables& tables) {
  std::vector<char> selected = chains;
  for (char id : selected)
    if (std::none_of(s.chains.begin(), s.chains.end(), [&](const Chain& c) { return c.chain_id == id; }))
      fail(ErrorCode::NoSelectedChain, std::string("chain ") + id + " is not present");
  if (selected.empty())
    for (const auto& summary : detect_chains(s))
      if (summary.kind == PolymerKind::Protein) selected.push_back(summary.chain_id);

  Subunit out;
  out.structure.id = s.id;
  out.structure.model_number = s.model_number;
  const auto is_selected = [&](char id) {
    return std::find(selected.begin(), selected.end(), id) != selected.end();
  };

  for (const auto& chain : s.chains) {
    const bool mine = is_selected(chain.chain_id);
    Chain kept;
    kept.chain_id = chain.chain_id;
    std::vector<const Residue*> polymer;
    for (const auto& r : chain.residues) {
      if (mine && is_amino_acid(r.residue_name)) {
        kept.residues.push_back(r);
        continue;
      }
      if (!mine && is_polymer_residue(r, tables)) {
        polymer.push_back(&r);
        continue;
      }
      // Het group: its own entity, unless it is solvent.
      const PartnerClass cls = classify_partner({&r}, tables);
      if (cls == PartnerClass::Solvent) continue;
      PartnerEntity e;
      e.description = r.residue_name + " " + std::string(1, r.chain_id) + " " + r.label();
      e.cls = cls;
      for (const auto& a : r.atoms) e.atoms.push_back(a.pos);
      out.partners.push_back(std::move(e));
    }
    if (!kept.residues.empty()) out.structure.chains.push_back(std::move(kept));
    if (!polymer.empty()) {
      PartnerEntity e;
      e.description = std::string("chain ") + chain.chain_id;
      e.cls = classify_partner(polymer, tables);
      for (const Residue* r : polymer)
        for (const auto& a : r->atoms) e.atoms.push_back(a.pos);
      out.partners.push_back(std::move(e));
    }
  }
  if (out.structure.chains.empty())
    fail(ErrorCode::NoSelectedChain, "no amino-acid residues in the selected chains");
  out.structure.reindex();
  return out;
}

LabelMatrix label_binding_residues(const Structure& subunit, const std::vector<PartnerEntity>& partners,
                                   double contact_cutoff) {
  if (!(contact_cutoff > 0.0)) fail(ErrorCode::InvalidArgument, "contact cutoff must be positive");
  LabelMatrix y;
  y.residue_count = subunit.residue_count();
  y.data.assign(y.residue_count * kNumBindingClasses, 0);

  std::array<std::vector<Vec3>, kNumBindingClasses> by_class;
  for (const auto& p : partners)
    if (auto c = to_binding_class(p.cls))
      by_class[class_index(*c)].insert(by_class[class_index(*c)].end(), p.atoms.begin(), p.atoms.end());

  for (std::size_t c = 0; c < kNumBindingClasses; ++c) {
    if (by_class[c].empty()) continue;
    const SpatialGrid grid(by_class[c], contact_cutoff);
    subunit.for_each_residue([&](const Residue& r) {
      for (const auto& a : r.atoms) {
        bool hit = false;
        grid.for_each_within(a.pos, contact_cutoff, [&](std::size_t, double) { hit = true; });
        if (hit) {
          y.data[r.index * kNumBindingClasses + c] = 1;
          break;
        }
      }
    });
  }
  return y;
}

}  // namespace egat
