// Command-line front end. Talks to the engine only through the C API.
#include "egat/egat.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCheckpoint = 3;
constexpr int kExitNumerical = 4;

struct CliFailure {
  int exit_code;
  std::string message;
};

bool is_checkpoint_status(egat_status s) {
  return s == EGAT_ERR_CORRUPT_FILE || s == EGAT_ERR_VERSION_MISMATCH || s == EGAT_ERR_SHAPE_MISMATCH ||
         s == EGAT_ERR_CONFIG_HASH_MISMATCH || s == EGAT_ERR_DIMENSION_MISMATCH;
}

int exit_code_for(egat_status s) {
  if (s == EGAT_ERR_NON_FINITE) return kExitNumerical;
  if (is_checkpoint_status(s)) return kExitCheckpoint;
  return kExitInput;
}

void check(egat_status s, const std::string& what) {
  if (s != EGAT_OK) throw CliFailure{exit_code_for(s), what + ": " + egat_last_error()};
}

// Status mapping for checkpoint loading, where I/O problems count as checkpoint failures too.
void check_checkpoint(egat_status s, const std::string& path) {
  if (s == EGAT_OK) return;
  const int code = s == EGAT_ERR_NON_FINITE ? kExitNumerical : kExitCheckpoint;
  throw CliFailure{code, "checkpoint " + path + ": " + egat_last_error()};
}

struct StringDeleter {
  void operator()(char* s) const { egat_free_string(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct StructureDeleter {
  void operator()(egat_structure* s) const { egat_structure_free(s); }
};
struct ModelDeleter {
  void operator()(egat_model* m) const { egat_model_free(m); }
};
struct PredictionDeleter {
  void operator()(egat_prediction* p) const { egat_prediction_free(p); }
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CliFailure{kExitInput, "cannot write " + path.string()};
  f << content;
  if (!f) throw CliFailure{kExitInput, "cannot write " + path.string()};
}

std::unique_ptr<egat_model, ModelDeleter> load_model(const std::string& path) {
  egat_model* m = nullptr;
  check_checkpoint(egat_model_load(path.c_str(), &m), path);
  return std::unique_ptr<egat_model, ModelDeleter>(m);
}

std::unique_ptr<egat_structure, StructureDeleter> load_structure(const std::string& path) {
  egat_structure* s = nullptr;
  check(egat_structure_load(path.c_str(), &s), path);
  return std::unique_ptr<egat_structure, StructureDeleter>(s);
}

struct PredictArgs {
  std::string pdb, checkpoint, chains, out_dir;
  double threshold = 0.5;
};

int cmd_predict(const PredictArgs& a) {
  auto model = load_model(a.checkpoint);
  auto structure = load_structure(a.pdb);
  egat_prediction* raw = nullptr;
  const egat_status st = egat_predict(model.get(), structure.get(), a.chains.c_str(), &raw);
  if (st == EGAT_ERR_CONFIG_HASH_MISMATCH || st == EGAT_ERR_DIMENSION_MISMATCH)
    throw CliFailure{kExitCheckpoint, std::string("checkpoint incompatible with features: ") + egat_last_error()};
  check(st, "prediction failed");
  std::unique_ptr<egat_prediction, PredictionDeleter> pred(raw);

  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  const std::string id = egat_prediction_structure_id(pred.get());
  nlohmann::json summary;
  summary["structure_id"] = id;
  summary["threshold"] = a.threshold;
  summary["checkpoint_id"] = egat_model_id(model.get());
  summary["classes"] = nlohmann::json::object();
  for (int c = 0; c < EGAT_NUM_CLASSES; ++c) {
    const std::string name = egat_class_name(c);
    char* pdb = nullptr;
    check(egat_prediction_bfactor_pdb(pred.get(), c, &pdb), "B-factor export");
    OwnedString pdb_text(pdb);
    char* csv = nullptr;
    check(egat_prediction_residue_csv(pred.get(), c, a.threshold, &csv), "CSV export");
    OwnedString csv_text(csv);
    std::size_t sites = 0;
    check(egat_prediction_site_count(pred.get(), c, a.threshold, &sites), "site count");
    const std::string pdb_name = id + "_" + name + ".pdb";
    const std::string csv_name = id + "_" + name + ".csv";
    write_file(dir / pdb_name, pdb_text.get());
    write_file(dir / csv_name, csv_text.get());
    summary["classes"][name] = {{"n_sites", sites}, {"csv", csv_name}, {"pdb", pdb_name}};
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string manifest, out;
  unsigned epochs = 100;
  double lr = 1e-5;
  unsigned batch = 8;
  unsigned checkpoint_every = 1000;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a) {
  egat_train_options opts;
  egat_train_options_default(&opts);
  opts.manifest = a.manifest.c_str();
  opts.out_dir = a.out.c_str();
  opts.epochs = a.epochs;
  opts.lr = a.lr;
  opts.batch = a.batch;
  opts.checkpoint_every = a.checkpoint_every;
  opts.seed = a.seed;
  char* best = nullptr;
  check(egat_train(&opts, &best), "training failed");
  OwnedString best_path(best);
  if (best_path) std::cout << "best checkpoint: " << best_path.get() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string manifest, split = "test", checkpoint;
  double threshold = 0.5;
};

int cmd_eval(const EvalArgs& a) {
  if (a.split != "train" && a.split != "val" && a.split != "test")
    throw CliFailure{kExitInput, "unknown split '" + a.split + "' (expected train, val or test)"};
  auto model = load_model(a.checkpoint);
  char* csv = nullptr;
  const egat_status st = egat_evaluate(model.get(), a.manifest.c_str(), a.split.c_str(), a.threshold, &csv);
  if (st == EGAT_ERR_CONFIG_HASH_MISMATCH || st == EGAT_ERR_DIMENSION_MISMATCH)
    throw CliFailure{kExitCheckpoint, std::string("checkpoint incompatible with features: ") + egat_last_error()};
  check(st, "evaluation failed");
  OwnedString table(csv);
  std::cout << table.get();
  write_file("eval_" + a.split + ".csv", table.get());
  return kExitOk;
}

struct FeaturesArgs {
  std::string pdb, out, chains;
  int k = 16;
  double cutoff = 5.0;
};

int cmd_features(const FeaturesArgs& a) {
  auto structure = load_structure(a.pdb);
  char* dump = nullptr;
  check(egat_structure_features(structure.get(), a.chains.c_str(), a.k, a.cutoff, &dump), "feature extraction");
  OwnedString text(dump);
  write_file(a.out, text.get());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-residue binding-site prediction for five partner classes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", egat_version());

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Predict binding probabilities for one structure");
  predict->add_option("--pdb", pa.pdb, "Input PDB file")->required()->check(CLI::ExistingFile);
  predict->add_option("--checkpoint", pa.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  predict->add_option("--chains", pa.chains, "Comma-separated chain ids (default: all protein chains)");
  predict->add_option("--threshold", pa.threshold, "Binding-site threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  predict->add_option("--out-dir", pa.out_dir, "Output directory")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a model from a manifest");
  train->add_option("--manifest", ta.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  train->add_option("--out", ta.out, "Output directory")->required();
  train->add_option("--epochs", ta.epochs)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--lr", ta.lr)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--batch", ta.batch)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--checkpoint-every", ta.checkpoint_every)->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--seed", ta.seed)->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest split");
  eval->add_option("--manifest", ea.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", ea.split, "train, val or test")->capture_default_str();
  eval->add_option("--checkpoint", ea.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--threshold", ea.threshold)->capture_default_str()->check(CLI::Range(0.0, 1.0));

  FeaturesArgs fa;
  auto* features = app.add_subcommand("features", "Dump node features and the atom graph");
  features->add_option("--pdb", fa.pdb, "Input PDB file")->required()->check(CLI::ExistingFile);
  features->add_option("--out", fa.out, "Output file")->required();
  features->add_option("--chains", fa.chains, "Comma-separated chain ids (default: all protein chains)");
  features->add_option("--k", fa.k, "Neighbors per atom")->capture_default_str()->check(CLI::PositiveNumber);
  features->add_option("--cutoff", fa.cutoff, "Edge cutoff in angstrom")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kExitInput;
  }

  try {
    if (*predict) return cmd_predict(pa);
    if (*train) return cmd_train(ta);
    if (*eval) return cmd_eval(ea);
    if (*features) return cmd_features(fa);
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
