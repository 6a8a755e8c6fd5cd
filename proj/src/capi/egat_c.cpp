#include "egat/egat.h"

#include "egat/atom_graph.hpp"
#include "egat/checkpoint.hpp"
#include "egat/error.hpp"
#include "egat/pdb.hpp"
#include "egat/predictor.hpp"
#include "egat/residue_table.hpp"
#include "egat/trainer.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

struct egat_structure {
  egat::Structure structure;
  std::vector<egat::ChainSummary> chains;
};

struct egat_model {
  egat::Model model;
  std::string id;
};

struct egat_prediction {
  egat::PredictionResult result;
};

namespace {

thread_local std::string g_last_error;

egat_status to_status(egat::ErrorCode code) {
  using egat::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return EGAT_ERR_INVALID_ARGUMENT;
    case ErrorCode::MalformedRecord: return EGAT_ERR_MALFORMED_RECORD;
    case ErrorCode::EmptyStructure: return EGAT_ERR_EMPTY_STRUCTURE;
    case ErrorCode::MissingProbability: return EGAT_ERR_MISSING_PROBABILITY;
    case ErrorCode::DimensionMismatch: return EGAT_ERR_DIMENSION_MISMATCH;
    case ErrorCode::DegenerateCoordinates: return EGAT_ERR_DEGENERATE_COORDINATES;
    case ErrorCode::ShapeMismatch: return EGAT_ERR_SHAPE_MISMATCH;
    case ErrorCode::DisconnectedLoss: return EGAT_ERR_DISCONNECTED_LOSS;
    case ErrorCode::NonFinite: return EGAT_ERR_NON_FINITE;
    case ErrorCode::VersionMismatch: return EGAT_ERR_VERSION_MISMATCH;
    case ErrorCode::CorruptFile: return EGAT_ERR_CORRUPT_FILE;
    case ErrorCode::ConfigHashMismatch: return EGAT_ERR_CONFIG_HASH_MISMATCH;
    case ErrorCode::EmptySplit: return EGAT_ERR_EMPTY_SPLIT;
    case ErrorCode::ManifestError: return EGAT_ERR_MANIFEST;
    case ErrorCode::NoSelectedChain: return EGAT_ERR_NO_SELECTED_CHAIN;
    case ErrorCode::Io: return EGAT_ERR_IO;
  }
  return EGAT_ERR_INTERNAL;
}

egat_status set_error(egat_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
egat_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return EGAT_OK;
  } catch (const egat::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(EGAT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(EGAT_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(bool ok, const char* message) {
  if (!ok) egat::fail(egat::ErrorCode::InvalidArgument, message);
}

std::vector<char> parse_chains(const char* chains) {
  std::vector<char> out;
  if (!chains) return out;
  std::string token;
  const auto flush = [&] {
    if (token.empty()) return;
    if (token.size() != 1) egat::fail(egat::ErrorCode::InvalidArgument, "chain ids are single characters: " + token);
    out.push_back(token[0]);
    token.clear();
  };
  for (const char* c = chains; *c; ++c) {
    if (*c == ',') flush();
    else if (*c != ' ' && *c != '\t') token.push_back(*c);
  }
  flush();
  return out;
}

egat::BindingClass class_at(int cls) {
  require(cls >= 0 && cls < EGAT_NUM_CLASSES, "class index out of range");
  return egat::kBindingClasses[static_cast<std::size_t>(cls)];
}

void require_threshold(double t) { require(t >= 0.0 && t <= 1.0, "threshold must be in [0,1]"); }

}  // namespace

extern "C" {

const char* egat_version(void) { return "1.0.0"; }

const char* egat_status_name(egat_status status) {
  switch (status) {
    case EGAT_OK: return "ok";
    case EGAT_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case EGAT_ERR_MALFORMED_RECORD: return "malformed_record";
    case EGAT_ERR_EMPTY_STRUCTURE: return "empty_structure";
    case EGAT_ERR_MISSING_PROBABILITY: return "missing_probability";
    case EGAT_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case EGAT_ERR_DEGENERATE_COORDINATES: return "degenerate_coordinates";
    case EGAT_ERR_SHAPE_MISMATCH: return "shape_mismatch";
    case EGAT_ERR_DISCONNECTED_LOSS: return "disconnected_loss";
    case EGAT_ERR_NON_FINITE: return "non_finite";
    case EGAT_ERR_VERSION_MISMATCH: return "version_mismatch";
    case EGAT_ERR_CORRUPT_FILE: return "corrupt_file";
    case EGAT_ERR_CONFIG_HASH_MISMATCH: return "config_hash_mismatch";
    case EGAT_ERR_EMPTY_SPLIT: return "empty_split";
    case EGAT_ERR_MANIFEST: return "manifest_error";
    case EGAT_ERR_NO_SELECTED_CHAIN: return "no_selected_chain";
    case EGAT_ERR_IO: return "io";
    case EGAT_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* egat_last_error(void) { return g_last_error.c_str(); }

void egat_free_string(char* s) { std::free(s); }

const char* egat_class_name(int cls) {
  if (cls < 0 || cls >= EGAT_NUM_CLASSES) return nullptr;
  return egat::binding_class_key(egat::kBindingClasses[static_cast<std::size_t>(cls)]);
}

int egat_class_index(const char* name) {
  if (!name) return -1;
  const auto c = egat::parse_binding_class(name);
  return c ? static_cast<int>(egat::class_index(*c)) : -1;
}

egat_status egat_structure_parse(const char* text, size_t length, const char* id, egat_structure** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    require(text != nullptr || length == 0, "text is null");
    auto h = std::make_unique<egat_structure>();
    h->structure = egat::parse_pdb(std::string_view(text ? text : "", length), id ? id : "");
    h->chains = egat::detect_chains(h->structure);
    *out = h.release();
  });
}

egat_status egat_structure_load(const char* path, egat_structure** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto h = std::make_unique<egat_structure>();
    h->structure = egat::read_pdb_file(path);
    h->chains = egat::detect_chains(h->structure);
    *out = h.release();
  });
}

void egat_structure_free(egat_structure* s) { delete s; }

const char* egat_structure_id(const egat_structure* s) { return s ? s->structure.id.c_str() : ""; }

size_t egat_structure_atom_count(const egat_structure* s) { return s ? s->structure.atom_count() : 0; }

size_t egat_structure_residue_count(const egat_structure* s) { return s ? s->structure.residue_count() : 0; }

size_t egat_structure_chain_count(const egat_structure* s) { return s ? s->chains.size() : 0; }

egat_status egat_structure_chain(const egat_structure* s, size_t i, char* chain_id, size_t* residues,
                                 const char** kind) {
  return guarded([&] {
    require(s != nullptr, "structure is null");
    require(i < s->chains.size(), "chain index out of range");
    const auto& c = s->chains[i];
    if (chain_id) *chain_id = c.chain_id;
    if (residues) *residues = c.residue_count;
    if (kind) *kind = egat::polymer_kind_name(c.kind);
  });
}

egat_status egat_structure_subunit_residues(const egat_structure* s, const char* chains, size_t* out) {
  return guarded([&] {
    require(s != nullptr && out != nullptr, "null argument");
    *out = egat::split_subunit(s->structure, parse_chains(chains)).structure.residue_count();
  });
}

egat_status egat_structure_features(const egat_structure* s, const char* chains, int k, double cutoff, char** out) {
  return guarded([&] {
    require(s != nullptr && out != nullptr, "null argument");
    require(k >= 1, "k must be at least 1");
    require(cutoff > 0.0, "cutoff must be positive");
    *out = nullptr;
    egat::Subunit su = egat::split_subunit(s->structure, parse_chains(chains));
    const auto prep = egat::prepare_subunit(std::move(su.structure), egat::FeatureConfig::defaults(), k, cutoff);
    std::ostringstream dump;
    egat::write_graph_dump(dump, prep.graph, &prep.features);
    *out = copy_string(dump.str());
  });
}

egat_status egat_model_load(const char* path, egat_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto h = std::make_unique<egat_model>();
    h->model = egat::load_checkpoint(path);
    h->id = egat::checkpoint_id(path);
    *out = h.release();
  });
}

egat_status egat_model_init(uint64_t seed, egat_model** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = nullptr;
    auto h = std::make_unique<egat_model>();
    const auto cfg = egat::FeatureConfig::defaults();
    egat::ModelConfig mc;
    mc.input_dim = cfg.dimension();
    h->model = egat::Model::initialize(mc, seed);
    h->model.feature_config_json = cfg.to_json();
    h->model.feature_config_hash = cfg.content_hash();
    h->id = egat::bytes_id(egat::serialize_checkpoint(h->model));
    *out = h.release();
  });
}

egat_status egat_model_save(const egat_model* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "null argument");
    egat::save_checkpoint(m->model, path);
  });
}

void egat_model_free(egat_model* m) { delete m; }

const char* egat_model_id(const egat_model* m) { return m ? m->id.c_str() : ""; }

size_t egat_model_parameter_count(const egat_model* m) { return m ? m->model.parameter_count() : 0; }

int64_t egat_model_step(const egat_model* m) { return m ? m->model.step : 0; }

egat_status egat_predict(const egat_model* m, const egat_structure* s, const char* chains, egat_prediction** out) {
  return guarded([&] {
    require(m != nullptr && s != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto h = std::make_unique<egat_prediction>();
    h->result = egat::predict_structure(m->model, s->structure, parse_chains(chains));
    *out = h.release();
  });
}

void egat_prediction_free(egat_prediction* p) { delete p; }

const char* egat_prediction_structure_id(const egat_prediction* p) { return p ? p->result.structure_id.c_str() : ""; }

size_t egat_prediction_residue_count(const egat_prediction* p) { return p ? p->result.residues.size() : 0; }

egat_status egat_prediction_residue(const egat_prediction* p, size_t i, char* chain_id, int* residue_id,
                                    char* insertion_code, const char** residue_name, double* probabilities) {
  return guarded([&] {
    require(p != nullptr, "prediction is null");
    require(i < p->result.residues.size(), "residue index out of range");
    const auto& r = p->result.residues[i];
    if (chain_id) *chain_id = r.chain_id;
    if (residue_id) *residue_id = r.residue_id;
    if (insertion_code) *insertion_code = r.insertion_code;
    if (residue_name) *residue_name = r.residue_name.c_str();
    if (probabilities)
      for (std::size_t c = 0; c < egat::kNumBindingClasses; ++c) probabilities[c] = r.mean_probability[c];
  });
}

egat_status egat_prediction_site_count(const egat_prediction* p, int cls, double threshold, size_t* out) {
  return guarded([&] {
    require(p != nullptr && out != nullptr, "null argument");
    require_threshold(threshold);
    *out = egat::select_binding_residues(p->result.residues, class_at(cls), threshold).size();
  });
}

egat_status egat_prediction_bfactor_pdb(const egat_prediction* p, int cls, char** out) {
  return guarded([&] {
    require(p != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const auto c = egat::class_index(class_at(cls));
    *out = copy_string(egat::write_bfactor_pdb(p->result.subunit, p->result.per_atom[c]));
  });
}

egat_status egat_prediction_residue_csv(const egat_prediction* p, int cls, double threshold, char** out) {
  return guarded([&] {
    require(p != nullptr && out != nullptr, "null argument");
    require_threshold(threshold);
    *out = nullptr;
    *out = copy_string(egat::export_residue_csv(p->result.residues, class_at(cls), threshold));
  });
}

void egat_train_options_default(egat_train_options* opts) {
  if (!opts) return;
  const egat::TrainConfig d;
  opts->manifest = nullptr;
  opts->out_dir = nullptr;
  opts->epochs = static_cast<uint32_t>(d.epochs);
  opts->lr = d.lr;
  opts->batch = static_cast<uint32_t>(d.batch);
  opts->checkpoint_every = static_cast<uint32_t>(d.checkpoint_every);
  opts->seed = d.seed;
  opts->max_steps = 0;
}

egat_status egat_train(const egat_train_options* opts, char** best_path) {
  return guarded([&] {
    require(opts != nullptr && opts->manifest != nullptr && opts->out_dir != nullptr, "manifest and out_dir required");
    if (best_path) *best_path = nullptr;
    egat::TrainConfig cfg;
    if (opts->epochs) cfg.epochs = opts->epochs;
    if (opts->lr != 0.0) cfg.lr = opts->lr;
    if (opts->batch) cfg.batch = opts->batch;
    if (opts->checkpoint_every) cfg.checkpoint_every = opts->checkpoint_every;
    cfg.seed = opts->seed;
    cfg.max_steps = opts->max_steps;
    cfg.out_dir = opts->out_dir;
    const auto result = egat::train_from_manifest(opts->manifest, cfg);
    if (best_path && result.best) *best_path = copy_string((std::filesystem::path(cfg.out_dir) / "best.egat").string());
  });
}

egat_status egat_evaluate(const egat_model* m, const char* manifest, const char* split, double threshold, char** csv) {
  return guarded([&] {
    require(m != nullptr && manifest != nullptr && split != nullptr && csv != nullptr, "null argument");
    require_threshold(threshold);
    *csv = nullptr;
    const auto report = egat::evaluate_manifest(m->model, manifest, egat::parse_split(split), threshold);
    *csv = copy_string(egat::metrics_csv(report));
  });
}

}  // extern "C"
