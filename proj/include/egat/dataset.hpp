#pragma once

#include "egat/feature_config.hpp"
#include "egat/model.hpp"
#include "egat/partners.hpp"

#include <string>
#include <vector>

namespace egat {

enum class Split { Train, Val, Test };

const char* split_name(Split s);
// Throws ManifestError for anything but train / val / test.
Split parse_split(const std::string& name);

struct ManifestEntry {
  std::string path;  // resolved against the manifest's directory
  std::vector<char> chains;
  Split split = Split::Train;
  std::string structure_id;  // file stem
};

// Tab-separated lines: structure path, comma-separated subunit chains, split.
// Blank lines and lines starting with '#' are skipped. Throws ManifestError on
// malformed lines or when a structure id appears in two splits.
std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::string& base_dir = ".");
std::vector<ManifestEntry> load_manifest(const std::string& path);

std::vector<ManifestEntry> entries_for(const std::vector<ManifestEntry>& all, Split s);

// One labelled subunit ready for the model.
struct Example {
  std::string id;
  GraphInput input;
  Matrix labels;  // R x 5, 0/1
};

Example make_example(const ManifestEntry& entry, const FeatureConfig& cfg, int k, double cutoff,
                     const PartnerTables& tables = PartnerTables::defaults());

std::vector<Example> make_examples(const std::vector<ManifestEntry>& entries, const FeatureConfig& cfg, int k,
                                   double cutoff, const PartnerTables& tables = PartnerTables::defaults());

}  // namespace egat
