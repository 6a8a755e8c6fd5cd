#pragma once

#include "egat/dataset.hpp"
#include "egat/loss.hpp"
#include "egat/metrics.hpp"
#include "egat/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace egat {

struct TrainConfig {
  std::size_t epochs = 100;
  double lr = 1e-5;
  std::size_t batch = 8;
  std::size_t checkpoint_every = 1000;
  std::uint64_t seed = 0;
  // Stops after this many optimizer steps when non-zero.
  std::size_t max_steps = 0;
  LossConfig loss;
  ModelConfig model;
  std::string out_dir;  // checkpoints, log and best marker; empty = keep in memory only
};

struct StepRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
};

struct CheckpointRecord {
  std::size_t step = 0;
  std::string path;
  double val_loss = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<StepRecord> steps;
  std::vector<double> epoch_val_loss;  // one entry per completed epoch
  std::vector<CheckpointRecord> checkpoints;
  std::optional<std::size_t> best;  // index into checkpoints
  std::string log_csv;
};

// Header comment echoing the run's hyperparameters, e.g.
// "(epochs=100, lr=1e-5, batch=8, checkpoint_every=1000)".
std::string train_log_header(const TrainConfig& cfg);

// Compact number formatting without exponent zero padding ("1e-5", "0.001").
std::string format_compact(double v);

// Weighted loss over a set of examples with weights from their own labels.
double dataset_loss(const Model& m, const std::vector<Example>& examples, const LossConfig& cfg);

// Runs the optimization loop. Batches are groups of `batch` structures whose
// gradients are accumulated before one Adam step; the loss is normalized by
// the batch's total residue count. Throws EmptySplit when train or val is
// empty and NonFinite (after writing nonfinite_step<k>.txt into out_dir) when
// the loss stops being finite.
TrainResult train(const std::vector<Example>& train_set, const std::vector<Example>& val_set,
                  const TrainConfig& cfg, const std::string& feature_config_json,
                  const std::string& feature_config_hash, std::optional<Model> init = std::nullopt);

TrainResult train_from_manifest(const std::string& manifest_path, const TrainConfig& cfg,
                                const FeatureConfig& features = FeatureConfig::defaults());

// Per-class metrics over the residues of every example, pooled.
MetricsReport evaluate(const Model& m, const std::vector<Example>& examples, double threshold = 0.5);

MetricsReport evaluate_manifest(const Model& m, const std::string& manifest_path, Split split,
                                double threshold = 0.5);

// "category,accuracy,f1,mcc,roc_auc" followed by one row per class.
std::string metrics_csv(const MetricsReport& r);

}  // namespace egat
