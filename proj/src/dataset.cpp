#include "egat/dataset.hpp"

#include "egat/error.hpp"
#include "egat/pdb.hpp"
#include "egat/predictor.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace egat {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  fail(ErrorCode::ManifestError, "unknown split '" + name + "'");
}

std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::string& base_dir) {
  std::vector<ManifestEntry> out;
  std::map<std::string, Split> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, '\t')) fields.push_back(f);
    if (fields.size() != 3)
      fail(ErrorCode::ManifestError, "manifest line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    ManifestEntry e;
    std::filesystem::path p(fields[0]);
    e.path = p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).lexically_normal().string();
    e.structure_id = p.stem().string();
    std::stringstream cs(fields[1]);
    std::string chain;
    while (std::getline(cs, chain, ',')) {
      if (chain.size() != 1)
        fail(ErrorCode::ManifestError, "manifest line " + std::to_string(line_no) + ": bad chain id '" + chain + "'");
      e.chains.push_back(chain[0]);
    }
    try {
      e.split = parse_split(fields[2]);
    } catch (const Error&) {
      fail(ErrorCode::ManifestError, "manifest line " + std::to_string(line_no) + ": unknown split '" + fields[2] + "'");
    }
    auto [it, inserted] = seen.emplace(e.structure_id, e.split);
    if (!inserted && it->second != e.split)
      fail(ErrorCode::ManifestError, "structure " + e.structure_id + " appears in two splits");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::ManifestError, "cannot open manifest " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_manifest(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::vector<ManifestEntry> entries_for(const std::vector<ManifestEntry>& all, Split s) {
  std::vector<ManifestEntry> out;
  for (const auto& e : all)
    if (e.split == s) out.push_back(e);
  return out;
}

Example make_example(const ManifestEntry& entry, const FeatureConfig& cfg, int k, double cutoff,
                     const PartnerTables& tables) {
  const Structure complex = read_pdb_file(entry.path);
  Subunit su = split_subunit(complex, entry.chains, tables);
  const LabelMatrix y = label_binding_residues(su.structure, su.partners);
  PreparedSubunit prep = prepare_subunit(std::move(su.structure), cfg, k, cutoff);
  Example ex;
  ex.id = entry.structure_id;
  ex.input = std::move(prep.input);
  ex.labels.resize(static_cast<Eigen::Index>(y.residue_count), static_cast<Eigen::Index>(kNumBindingClasses));
  for (std::size_t r = 0; r < y.residue_count; ++r)
    for (std::size_t c = 0; c < kNumBindingClasses; ++c)
      ex.labels(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = y.at(r, c);
  return ex;
}

std::vector<Example> make_examples(const std::vector<ManifestEntry>& entries, const FeatureConfig& cfg, int k,
                                   double cutoff, const PartnerTables& tables) {
  std::vector<Example> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(make_example(e, cfg, k, cutoff, tables));
  return out;
}

}  // namespace egat
