#ifndef EGAT_EGAT_H
#define EGAT_EGAT_H

/* C interface to the binding-site engine. Every function returns an
 * egat_status; on failure egat_last_error() describes the problem for the
 * calling thread. Strings returned through char** are owned by the caller and
 * released with egat_free_string. Handles are released with their _free
 * function; passing NULL to any _free function is a no-op. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define EGAT_API __declspec(dllexport)
#else
#define EGAT_API __attribute__((visibility("default")))
#endif

typedef struct egat_structure egat_structure;
typedef struct egat_model egat_model;
typedef struct egat_prediction egat_prediction;

typedef enum egat_status {
  EGAT_OK = 0,
  EGAT_ERR_INVALID_ARGUMENT = 1,
  EGAT_ERR_MALFORMED_RECORD = 2,
  EGAT_ERR_EMPTY_STRUCTURE = 3,
  EGAT_ERR_MISSING_PROBABILITY = 4,
  EGAT_ERR_DIMENSION_MISMATCH = 5,
  EGAT_ERR_DEGENERATE_COORDINATES = 6,
  EGAT_ERR_SHAPE_MISMATCH = 7,
  EGAT_ERR_DISCONNECTED_LOSS = 8,
  EGAT_ERR_NON_FINITE = 9,
  EGAT_ERR_VERSION_MISMATCH = 10,
  EGAT_ERR_CORRUPT_FILE = 11,
  EGAT_ERR_CONFIG_HASH_MISMATCH = 12,
  EGAT_ERR_EMPTY_SPLIT = 13,
  EGAT_ERR_MANIFEST = 14,
  EGAT_ERR_NO_SELECTED_CHAIN = 15,
  EGAT_ERR_IO = 16,
  EGAT_ERR_INTERNAL = 99
} egat_status;

/* Binding classes in output order: protein, dna_rna, ion, ligand, lipid. */
#define EGAT_NUM_CLASSES 5

EGAT_API const char* egat_version(void);
EGAT_API const char* egat_status_name(egat_status status);
/* Message of the most recent failure on this thread ("" if none). */
EGAT_API const char* egat_last_error(void);
EGAT_API void egat_free_string(char* s);

/* Class key ("protein", "dna_rna", ...) or NULL when out of range. */
EGAT_API const char* egat_class_name(int cls);
/* Index of a class key, or -1. */
EGAT_API int egat_class_index(const char* name);

/* ---- structures ---- */

EGAT_API egat_status egat_structure_parse(const char* text, size_t length, const char* id, egat_structure** out);
EGAT_API egat_status egat_structure_load(const char* path, egat_structure** out);
EGAT_API void egat_structure_free(egat_structure* s);
EGAT_API const char* egat_structure_id(const egat_structure* s);
EGAT_API size_t egat_structure_atom_count(const egat_structure* s);
EGAT_API size_t egat_structure_residue_count(const egat_structure* s);

/* Chains as reported by chain detection (waters ignored). kind is
 * "protein", "nucleic" or "other". */
EGAT_API size_t egat_structure_chain_count(const egat_structure* s);
EGAT_API egat_status egat_structure_chain(const egat_structure* s, size_t i, char* chain_id, size_t* residues,
                                          const char** kind);

/* Number of residues a prediction over `chains` would cover. `chains` is a
 * comma-separated list of chain ids; NULL or "" selects every protein chain. */
EGAT_API egat_status egat_structure_subunit_residues(const egat_structure* s, const char* chains, size_t* out);

/* Node-feature matrix and edge list of the selected subunit in the text
 * graph-dump format. */
EGAT_API egat_status egat_structure_features(const egat_structure* s, const char* chains, int k, double cutoff,
                                             char** out);

/* ---- models ---- */

/* Loads and validates a checkpoint. */
EGAT_API egat_status egat_model_load(const char* path, egat_model** out);
/* Freshly initialized model with default architecture and features. */
EGAT_API egat_status egat_model_init(uint64_t seed, egat_model** out);
EGAT_API egat_status egat_model_save(const egat_model* m, const char* path);
EGAT_API void egat_model_free(egat_model* m);
/* Short checkpoint identifier (CRC-32 of the loaded file, or of the
 * serialized model when it was not loaded from disk). */
EGAT_API const char* egat_model_id(const egat_model* m);
EGAT_API size_t egat_model_parameter_count(const egat_model* m);
EGAT_API int64_t egat_model_step(const egat_model* m);

/* ---- prediction ---- */

/* Predicts all five classes for the selected chains. A loaded model may be
 * shared by concurrent calls. */
EGAT_API egat_status egat_predict(const egat_model* m, const egat_structure* s, const char* chains,
                                  egat_prediction** out);
EGAT_API void egat_prediction_free(egat_prediction* p);
EGAT_API const char* egat_prediction_structure_id(const egat_prediction* p);
EGAT_API size_t egat_prediction_residue_count(const egat_prediction* p);
/* Residue i of the subunit. residue_name points into the prediction and
 * stays valid until it is freed. probabilities receives EGAT_NUM_CLASSES
 * values; any output pointer may be NULL. */
EGAT_API egat_status egat_prediction_residue(const egat_prediction* p, size_t i, char* chain_id, int* residue_id,
                                             char* insertion_code, const char** residue_name,
                                             double* probabilities);
/* Residues with probability >= threshold for the class. */
EGAT_API egat_status egat_prediction_site_count(const egat_prediction* p, int cls, double threshold, size_t* out);
/* Subunit PDB with the class probability in every atom's B-factor. */
EGAT_API egat_status egat_prediction_bfactor_pdb(const egat_prediction* p, int cls, char** out);
/* "chain,residue_id,residue_name,mean_probability" rows >= threshold. */
EGAT_API egat_status egat_prediction_residue_csv(const egat_prediction* p, int cls, double threshold, char** out);

/* ---- training and evaluation ---- */

typedef struct egat_train_options {
  const char* manifest;
  const char* out_dir;
  uint32_t epochs;           /* 0 = 100 */
  double lr;                 /* 0 = 1e-5 */
  uint32_t batch;            /* 0 = 8 */
  uint32_t checkpoint_every; /* 0 = 1000 */
  uint64_t seed;
  uint64_t max_steps; /* 0 = no limit */
} egat_train_options;

/* Fills in the defaults listed above. */
EGAT_API void egat_train_options_default(egat_train_options* opts);

/* Trains from a manifest, writing train_log.csv, step checkpoints,
 * best.egat and best.txt into out_dir. best_path (optional) receives the
 * path of best.egat. */
EGAT_API egat_status egat_train(const egat_train_options* opts, char** best_path);

/* Metrics table "category,accuracy,f1,mcc,roc_auc" for one manifest split
 * ("train", "val" or "test"). */
EGAT_API egat_status egat_evaluate(const egat_model* m, const char* manifest, const char* split, double threshold,
                                   char** csv);

#ifdef __cplusplus
}
#endif

#endif
