#include "egat/egat.h"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <memory>
#include <sstream>
#include <thread>

extern "C" int egat_c_header_check(void);

using egat::test::read_text;
using egat::test::source_path;
using egat::test::structure_path;
using egat::test::TempDir;
using egat::test::write_text;

namespace {

struct Free {
  void operator()(egat_structure* s) const { egat_structure_free(s); }
  void operator()(egat_model* m) const { egat_model_free(m); }
  void operator()(egat_prediction* p) const { egat_prediction_free(p); }
  void operator()(char* s) const { egat_free_string(s); }
};
using StructurePtr = std::unique_ptr<egat_structure, Free>;
using ModelPtr = std::unique_ptr<egat_model, Free>;
using PredictionPtr = std::unique_ptr<egat_prediction, Free>;
using StringPtr = std::unique_ptr<char, Free>;

StructurePtr load(const std::string& id) {
  egat_structure* s = nullptr;
  EXPECT_EQ(egat_structure_load(structure_path(id).c_str(), &s), EGAT_OK) << egat_last_error();
  return StructurePtr(s);
}

ModelPtr toy_model() {
  egat_model* m = nullptr;
  EXPECT_EQ(egat_model_load(source_path("data/toy_checkpoint.egat").c_str(), &m), EGAT_OK) << egat_last_error();
  return ModelPtr(m);
}

PredictionPtr predict(const egat_model* m, const egat_structure* s, const char* chains) {
  egat_prediction* p = nullptr;
  EXPECT_EQ(egat_predict(m, s, chains, &p), EGAT_OK) << egat_last_error();
  return PredictionPtr(p);
}

std::vector<double> all_probabilities(const egat_prediction* p) {
  std::vector<double> out;
  for (std::size_t i = 0; i < egat_prediction_residue_count(p); ++i) {
    double probs[EGAT_NUM_CLASSES];
    EXPECT_EQ(egat_prediction_residue(p, i, nullptr, nullptr, nullptr, nullptr, probs), EGAT_OK);
    out.insert(out.end(), probs, probs + EGAT_NUM_CLASSES);
  }
  return out;
}

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(CApi, HeaderCompilesAsC) { EXPECT_EQ(egat_c_header_check(), 1); }

TEST(CApi, NamesAndClasses) {
  EXPECT_STRNE(egat_version(), "");
  EXPECT_STREQ(egat_status_name(EGAT_ERR_CORRUPT_FILE), "corrupt_file");
  EXPECT_STREQ(egat_status_name(EGAT_ERR_NO_SELECTED_CHAIN), "no_selected_chain");
  const char* keys[] = {"protein", "dna_rna", "ion", "ligand", "lipid"};
  for (int c = 0; c < EGAT_NUM_CLASSES; ++c) {
    EXPECT_STREQ(egat_class_name(c), keys[c]);
    EXPECT_EQ(egat_class_index(keys[c]), c);
  }
  EXPECT_EQ(egat_class_name(5), nullptr);
  EXPECT_EQ(egat_class_name(-1), nullptr);
  EXPECT_EQ(egat_class_index("solvent"), -1);
  EXPECT_EQ(egat_class_index(nullptr), -1);
}

TEST(CApi, StructureParsing) {
  const std::string text = read_text(structure_path("1ubi"));
  egat_structure* raw = nullptr;
  ASSERT_EQ(egat_structure_parse(text.data(), text.size(), "ubq", &raw), EGAT_OK);
  StructurePtr s(raw);
  EXPECT_STREQ(egat_structure_id(s.get()), "ubq");
  EXPECT_GT(egat_structure_atom_count(s.get()), 600u);
  ASSERT_EQ(egat_structure_chain_count(s.get()), 1u);
  char id = 0;
  std::size_t residues = 0;
  const char* kind = nullptr;
  ASSERT_EQ(egat_structure_chain(s.get(), 0, &id, &residues, &kind), EGAT_OK);
  EXPECT_EQ(id, 'A');
  EXPECT_EQ(residues, 76u);
  EXPECT_STREQ(kind, "protein");
  EXPECT_EQ(egat_structure_chain(s.get(), 1, &id, &residues, &kind), EGAT_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ParseFailuresSetLastError) {
  const std::string junk = "this is not a structure\n";
  egat_structure* s = nullptr;
  const egat_status st = egat_structure_parse(junk.data(), junk.size(), "x", &s);
  EXPECT_NE(st, EGAT_OK);
  EXPECT_EQ(s, nullptr);
  EXPECT_STRNE(egat_last_error(), "");
  EXPECT_EQ(egat_structure_load("/nonexistent/file.pdb", &s), EGAT_ERR_IO);
  EXPECT_EQ(egat_structure_parse(nullptr, 4, "x", &s), EGAT_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(egat_structure_parse(junk.data(), junk.size(), "x", nullptr), EGAT_ERR_INVALID_ARGUMENT);
}

TEST(CApi, LastErrorIsPerThread) {
  egat_structure* s = nullptr;
  egat_structure_load("/nonexistent/file.pdb", &s);
  const std::string here = egat_last_error();
  std::string there = "unset";
  std::thread([&] { there = egat_last_error(); }).join();
  EXPECT_FALSE(here.empty());
  EXPECT_EQ(there, "");
}

TEST(CApi, SubunitSelection) {
  const StructurePtr s = load("7pbl");
  std::size_t all = 0, ab = 0, a = 0;
  ASSERT_EQ(egat_structure_subunit_residues(s.get(), nullptr, &all), EGAT_OK);
  ASSERT_EQ(egat_structure_subunit_residues(s.get(), "A, B", &ab), EGAT_OK);
  ASSERT_EQ(egat_structure_subunit_residues(s.get(), "A", &a), EGAT_OK);
  EXPECT_GT(a, 0u);
  EXPECT_EQ(ab, 2 * a);
  EXPECT_GT(all, ab);
  EXPECT_EQ(egat_structure_subunit_residues(s.get(), "Q", &a), EGAT_ERR_NO_SELECTED_CHAIN);
  EXPECT_EQ(egat_structure_subunit_residues(s.get(), "AB", &a), EGAT_ERR_INVALID_ARGUMENT);
}

TEST(CApi, FeatureDump) {
  const StructurePtr s = load("1ejg");
  char* raw = nullptr;
  ASSERT_EQ(egat_structure_features(s.get(), "", 16, 5.0, &raw), EGAT_OK);
  const StringPtr dump(raw);
  std::istringstream in(dump.get());
  std::string magic, word;
  std::size_t nodes = 0, dim = 0, edges = 0;
  std::getline(in, magic);
  in >> word >> nodes >> dim;
  EXPECT_EQ(word, "nodes");
  in >> word >> edges;
  EXPECT_EQ(word, "edges");
  EXPECT_EQ(magic, "# egat-graph 1");
  EXPECT_EQ(nodes, egat_structure_atom_count(s.get()));
  EXPECT_EQ(dim, 80u);
  EXPECT_EQ(line_count(dump.get()), 3 + nodes + edges);
  EXPECT_EQ(egat_structure_features(s.get(), "", 0, 5.0, &raw), EGAT_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(egat_structure_features(s.get(), "", 16, -1.0, &raw), EGAT_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ModelLifecycle) {
  TempDir dir;
  egat_model* raw = nullptr;
  ASSERT_EQ(egat_model_init(3, &raw), EGAT_OK);
  ModelPtr m(raw);
  EXPECT_EQ(egat_model_parameter_count(m.get()), 39893u);
  EXPECT_EQ(egat_model_step(m.get()), 0);
  EXPECT_EQ(std::strlen(egat_model_id(m.get())), 8u);
  const std::string path = dir.file("m.egat");
  ASSERT_EQ(egat_model_save(m.get(), path.c_str()), EGAT_OK);
  egat_model* back = nullptr;
  ASSERT_EQ(egat_model_load(path.c_str(), &back), EGAT_OK);
  ModelPtr loaded(back);
  EXPECT_STREQ(egat_model_id(loaded.get()), egat_model_id(m.get()));

  std::string bytes = read_text(path);
  bytes[bytes.size() / 2] ^= 0x11;
  write_text(dir.file("bad.egat"), bytes);
  egat_model* bad = nullptr;
  EXPECT_EQ(egat_model_load(dir.file("bad.egat").c_str(), &bad), EGAT_ERR_CORRUPT_FILE);
  EXPECT_EQ(bad, nullptr);
}

TEST(CApi, PredictionAccessors) {
  const ModelPtr m = toy_model();
  const StructurePtr s = load("1ubi");
  const PredictionPtr p = predict(m.get(), s.get(), "A");
  EXPECT_STREQ(egat_prediction_structure_id(p.get()), "1ubi");
  ASSERT_EQ(egat_prediction_residue_count(p.get()), 76u);
  char chain = 0, icode = 0;
  int resid = 0;
  const char* name = nullptr;
  double probs[EGAT_NUM_CLASSES];
  ASSERT_EQ(egat_prediction_residue(p.get(), 0, &chain, &resid, &icode, &name, probs), EGAT_OK);
  EXPECT_EQ(chain, 'A');
  EXPECT_EQ(resid, 1);
  EXPECT_EQ(icode, ' ');
  EXPECT_STREQ(name, "MET");
  for (double v : all_probabilities(p.get())) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(egat_prediction_residue(p.get(), 76, &chain, &resid, &icode, &name, probs), EGAT_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ExportsAgreeWithSiteCounts) {
  const ModelPtr m = toy_model();
  const StructurePtr s = load("3mht");
  const PredictionPtr p = predict(m.get(), s.get(), nullptr);
  for (int c = 0; c < EGAT_NUM_CLASSES; ++c) {
    for (double t : {0.0, 0.5, 1.0}) {
      std::size_t sites = 0;
      ASSERT_EQ(egat_prediction_site_count(p.get(), c, t, &sites), EGAT_OK);
      char* csv = nullptr;
      ASSERT_EQ(egat_prediction_residue_csv(p.get(), c, t, &csv), EGAT_OK);
      const StringPtr table(csv);
      EXPECT_EQ(line_count(table.get()), sites + 1);
      EXPECT_EQ(std::string(table.get()).rfind("chain,residue_id,residue_name,mean_probability\n", 0), 0u);
    }
    char* pdb = nullptr;
    ASSERT_EQ(egat_prediction_bfactor_pdb(p.get(), c, &pdb), EGAT_OK);
    const StringPtr text(pdb);
    egat_structure* reparsed = nullptr;
    ASSERT_EQ(egat_structure_parse(text.get(), std::strlen(text.get()), "x", &reparsed), EGAT_OK);
    StructurePtr r(reparsed);
    EXPECT_EQ(egat_structure_residue_count(r.get()), egat_prediction_residue_count(p.get()));
  }
  std::size_t sites = 0;
  EXPECT_EQ(egat_prediction_site_count(p.get(), 5, 0.5, &sites), EGAT_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(egat_prediction_site_count(p.get(), 0, 1.5, &sites), EGAT_ERR_INVALID_ARGUMENT);
}

TEST(CApi, MemorizedDnaContactsScoreHigh) {
  const ModelPtr m = toy_model();
  const StructurePtr s = load("3mht");
  const PredictionPtr p = predict(m.get(), s.get(), "A");
  std::size_t sites = 0;
  ASSERT_EQ(egat_prediction_site_count(p.get(), egat_class_index("dna_rna"), 0.5, &sites), EGAT_OK);
  EXPECT_GT(sites, 20u);
  EXPECT_LT(sites, 100u);
}

TEST(CApi, ConcurrentPredictionsShareModel) {
  const ModelPtr m = toy_model();
  const StructurePtr s = load("1ejg");
  const auto reference = all_probabilities(predict(m.get(), s.get(), nullptr).get());
  std::vector<std::vector<double>> results(4);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < results.size(); ++t)
    threads.emplace_back([&, t] {
      egat_prediction* p = nullptr;
      if (egat_predict(m.get(), s.get(), nullptr, &p) == EGAT_OK) results[t] = all_probabilities(p);
      egat_prediction_free(p);
    });
  for (auto& t : threads) t.join();
  for (const auto& r : results) EXPECT_EQ(r, reference);
}

TEST(CApi, TrainAndEvaluate) {
  TempDir dir;
  write_text(dir.file("m.tsv"), structure_path("1ejg") + "\tA\ttrain\n" + structure_path("1ubi") + "\tA\tval\n" +
                                    structure_path("1ake") + "\tA\ttest\n");
  egat_train_options opts;
  egat_train_options_default(&opts);
  EXPECT_EQ(opts.epochs, 100u);
  EXPECT_EQ(opts.batch, 8u);
  EXPECT_EQ(opts.checkpoint_every, 1000u);
  EXPECT_DOUBLE_EQ(opts.lr, 1e-5);
  const std::string manifest = dir.file("m.tsv"), out = dir.file("run");
  opts.manifest = manifest.c_str();
  opts.out_dir = out.c_str();
  opts.epochs = 2;
  char* best = nullptr;
  ASSERT_EQ(egat_train(&opts, &best), EGAT_OK) << egat_last_error();
  const StringPtr best_path(best);
  egat_model* raw = nullptr;
  ASSERT_EQ(egat_model_load(best_path.get(), &raw), EGAT_OK);
  ModelPtr m(raw);
  EXPECT_EQ(egat_model_step(m.get()), 2);

  char* csv = nullptr;
  ASSERT_EQ(egat_evaluate(m.get(), manifest.c_str(), "test", 0.5, &csv), EGAT_OK) << egat_last_error();
  const StringPtr table(csv);
  EXPECT_EQ(std::string(table.get()).rfind("category,accuracy,f1,mcc,roc_auc\n", 0), 0u);
  EXPECT_EQ(line_count(table.get()), 6u);
  EXPECT_EQ(egat_evaluate(m.get(), manifest.c_str(), "dev", 0.5, &csv), EGAT_ERR_MANIFEST);

  write_text(dir.file("empty.tsv"), "# nothing\n");
  const std::string empty = dir.file("empty.tsv");
  opts.manifest = empty.c_str();
  EXPECT_EQ(egat_train(&opts, nullptr), EGAT_ERR_EMPTY_SPLIT);
}
