#include "egat/trainer.hpp"

#include "egat/checkpoint.hpp"
#include "egat/error.hpp"
#include "egat/optim.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace egat {

std::string format_compact(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  std::string s = buf;
  const auto e = s.find('e');
  if (e == std::string::npos) return s;
  std::string mant = s.substr(0, e);
  std::string exp = s.substr(e + 1);
  std::string sign;
  if (!exp.empty() && (exp[0] == '+' || exp[0] == '-')) {
    if (exp[0] == '-') sign = "-";
    exp.erase(0, 1);
  }
  const auto nz = exp.find_first_not_of('0');
  exp = nz == std::string::npos ? "0" : exp.substr(nz);
  return mant + "e" + sign + exp;
}

std::string train_log_header(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "# egat train (epochs=" << cfg.epochs << ", lr=" << format_compact(cfg.lr) << ", batch=" << cfg.batch
      << ", checkpoint_every=" << cfg.checkpoint_every << ") seed=" << cfg.seed << '\n'
      << "step,epoch,train_loss,val_loss,checkpoint_path\n";
  return out.str();
}

double dataset_loss(const Model& m, const std::vector<Example>& examples, const LossConfig& cfg) {
  if (examples.empty()) fail(ErrorCode::EmptySplit, "no examples");
  std::vector<const Matrix*> blocks;
  double residues = 0.0;
  for (const auto& ex : examples) {
    blocks.push_back(&ex.labels);
    residues += static_cast<double>(ex.labels.rows());
  }
  const Matrix w = class_weights(blocks, cfg);
  NoGradGuard no_grad;
  double total = 0.0;
  for (const auto& ex : examples) {
    const ForwardResult r = forward(m, ex.input);
    total += bce_with_logits(r.logits, ex.labels, w, residues).item();
  }
  return total;
}

namespace {

std::string fmt_loss(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8f", v);
  return buf;
}

class LogWriter {
 public:
  LogWriter(std::string* text, const std::string& path) : text_(text) {
    if (!path.empty()) file_.open(path, std::ios::trunc);
  }
  void write(const std::string& s) {
    *text_ += s;
    if (file_.is_open()) {
      file_ << s;
      file_.flush();
    }
  }

 private:
  std::string* text_;
  std::ofstream file_;
};

void write_nonfinite_dump(const std::string& out_dir, std::size_t step, std::size_t epoch,
                          const std::vector<const Example*>& batch, double partial_loss, const std::string& why) {
  if (out_dir.empty()) return;
  std::ofstream f(std::filesystem::path(out_dir) / ("nonfinite_step" + std::to_string(step) + ".txt"));
  f << "step=" << step << "\nepoch=" << epoch << "\nreason=" << why << "\npartial_loss=" << partial_loss
    << "\nstructures=";
  for (std::size_t i = 0; i < batch.size(); ++i) f << (i ? "," : "") << batch[i]->id;
  f << "\n";
  for (const Example* ex : batch)
    f << ex->id << " nodes=" << ex->input.node_count << " edges=" << ex->input.edge_count()
      << " residues=" << ex->input.residue_count << " positives=" << ex->labels.sum() << "\n";
}

}  // namespace

TrainResult train(const std::vector<Example>& train_set, const std::vector<Example>& val_set,
                  const TrainConfig& cfg, const std::string& feature_config_json,
                  const std::string& feature_config_hash, std::optional<Model> init) {
  if (train_set.empty()) fail(ErrorCode::EmptySplit, "training split is empty");
  if (val_set.empty()) fail(ErrorCode::EmptySplit, "validation split is empty");
  if (cfg.batch == 0 || cfg.checkpoint_every == 0)
    fail(ErrorCode::InvalidArgument, "batch and checkpoint_every must be positive");
  if (!(cfg.lr > 0.0)) fail(ErrorCode::InvalidArgument, "learning rate must be positive");
  cfg.loss.validate();

  TrainResult result;
  if (init) {
    result.model = std::move(*init);
  } else {
    ModelConfig mc = cfg.model;
    mc.input_dim = static_cast<std::size_t>(train_set.front().input.features.cols());
    result.model = Model::initialize(mc, cfg.seed);
  }
  Model& model = result.model;
  model.feature_config_json = feature_config_json;
  model.feature_config_hash = feature_config_hash;

  const bool persist = !cfg.out_dir.empty();
  if (persist) std::filesystem::create_directories(cfg.out_dir);
  LogWriter log(&result.log_csv, persist ? (std::filesystem::path(cfg.out_dir) / "train_log.csv").string() : "");
  log.write(train_log_header(cfg));

  // Warm-up pass: validates shapes end to end before any update.
  {
    NoGradGuard no_grad;
    forward(model, train_set.front().input);
  }

  std::mt19937_64 shuffle_rng(cfg.seed * 2 + 1);
  std::mt19937_64 dropout_rng(cfg.seed * 2 + 2);
  AdamState adam;
  std::size_t step = 0;
  bool done = false;

  const auto save = [&](std::size_t epoch) {
    CheckpointRecord rec;
    rec.step = step;
    rec.val_loss = dataset_loss(model, val_set, cfg.loss);
    model.step = static_cast<std::int64_t>(step);
    if (persist) {
      char name[48];
      std::snprintf(name, sizeof name, "step_%09zu.egat", step);
      rec.path = name;
      save_checkpoint(model, (std::filesystem::path(cfg.out_dir) / name).string());
    }
    log.write(std::to_string(step) + "," + std::to_string(epoch) + ",,," + rec.path + "\n");
    result.checkpoints.push_back(rec);
    if (!result.best || rec.val_loss < result.checkpoints[*result.best].val_loss)
      result.best = result.checkpoints.size() - 1;
  };

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs && !done; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng() % i]);

    for (std::size_t start = 0; start < order.size() && !done; start += cfg.batch) {
      std::vector<const Example*> batch;
      for (std::size_t i = start; i < std::min(start + cfg.batch, order.size()); ++i)
        batch.push_back(&train_set[order[i]]);
      std::vector<const Matrix*> blocks;
      double residues = 0.0;
      for (const Example* ex : batch) {
        blocks.push_back(&ex->labels);
        residues += static_cast<double>(ex->labels.rows());
      }
      const Matrix w = class_weights(blocks, cfg.loss);

      model.zero_grad();
      double loss = 0.0;
      try {
        for (const Example* ex : batch) {
          Tape tape;
          ForwardOptions opts;
          opts.training = true;
          opts.rng = &dropout_rng;
          const ForwardResult r = forward(model, ex->input, opts);
          const Var l = bce_with_logits(r.logits, ex->labels, w, residues);
          loss += l.item();
          tape.backward(l);
        }
        if (!std::isfinite(loss)) fail(ErrorCode::NonFinite, "loss is not finite");
        for (const auto& p : model.parameters())
          if (!p.grad().allFinite()) fail(ErrorCode::NonFinite, "gradient is not finite");
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFinite) throw;
        write_nonfinite_dump(cfg.out_dir, step + 1, epoch, batch, loss, e.what());
        fail(ErrorCode::NonFinite, "non-finite loss at step " + std::to_string(step + 1) + ": " + e.what());
      }

      adam_step(model.parameters(), adam, cfg.lr);
      quantize_to_float32(model);
      model.zero_grad();
      ++step;
      result.steps.push_back({step, epoch, loss});
      log.write(std::to_string(step) + "," + std::to_string(epoch) + "," + fmt_loss(loss) + ",,\n");
      if (step % cfg.checkpoint_every == 0) save(epoch);
      if (cfg.max_steps && step >= cfg.max_steps) done = true;
    }
    const double val = dataset_loss(model, val_set, cfg.loss);
    result.epoch_val_loss.push_back(val);
    log.write(std::to_string(step) + "," + std::to_string(epoch) + ",," + fmt_loss(val) + ",\n");
  }
  if (result.checkpoints.empty() || result.checkpoints.back().step != step)
    save(result.steps.empty() ? 0 : result.steps.back().epoch);

  if (persist && result.best) {
    const auto& best = result.checkpoints[*result.best];
    const auto dir = std::filesystem::path(cfg.out_dir);
    std::filesystem::copy_file(dir / best.path, dir / "best.egat",
                               std::filesystem::copy_options::overwrite_existing);
    std::ofstream marker(dir / "best.txt", std::ios::trunc);
    marker << best.path << '\t' << best.step << '\t' << fmt_loss(best.val_loss) << '\n';
  }
  return result;
}

TrainResult train_from_manifest(const std::string& manifest_path, const TrainConfig& cfg,
                                const FeatureConfig& features) {
  const auto entries = load_manifest(manifest_path);
  const auto train_entries = entries_for(entries, Split::Train);
  const auto val_entries = entries_for(entries, Split::Val);
  if (train_entries.empty()) fail(ErrorCode::EmptySplit, "manifest has no train entries");
  if (val_entries.empty()) fail(ErrorCode::EmptySplit, "manifest has no val entries");
  const auto train_set = make_examples(train_entries, features, cfg.model.k, cfg.model.cutoff);
  const auto val_set = make_examples(val_entries, features, cfg.model.k, cfg.model.cutoff);
  return train(train_set, val_set, cfg, features.to_json(), features.content_hash());
}

MetricsReport evaluate(const Model& m, const std::vector<Example>& examples, double threshold) {
  if (examples.empty()) fail(ErrorCode::EmptySplit, "evaluation split is empty");
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail(ErrorCode::InvalidArgument, "threshold must be in [0,1]");
  std::array<std::vector<double>, kNumBindingClasses> scores;
  std::array<std::vector<std::uint8_t>, kNumBindingClasses> labels;
  NoGradGuard no_grad;
  for (const auto& ex : examples) {
    const ForwardResult r = forward(m, ex.input);
    for (Eigen::Index i = 0; i < r.probabilities.rows(); ++i)
      for (std::size_t c = 0; c < kNumBindingClasses; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        scores[c].push_back(r.probabilities(i, ci));
        labels[c].push_back(ex.labels(i, ci) > 0.5 ? 1 : 0);
      }
  }
  MetricsReport report;
  for (std::size_t c = 0; c < kNumBindingClasses; ++c) report[c] = compute_metrics(scores[c], labels[c], threshold);
  return report;
}

MetricsReport evaluate_manifest(const Model& m, const std::string& manifest_path, Split split, double threshold) {
  const auto entries = entries_for(load_manifest(manifest_path), split);
  if (entries.empty()) fail(ErrorCode::EmptySplit, std::string("manifest has no ") + split_name(split) + " entries");
  const FeatureConfig cfg =
      m.feature_config_json.empty() ? FeatureConfig::defaults() : FeatureConfig::from_json(m.feature_config_json);
  return evaluate(m, make_examples(entries, cfg, m.config().k, m.config().cutoff), threshold);
}

std::string metrics_csv(const MetricsReport& r) {
  std::string out = "category,accuracy,f1,mcc,roc_auc\n";
  char buf[160];
  for (std::size_t c = 0; c < kNumBindingClasses; ++c) {
    const ClassMetrics& m = r[c];
    std::string auc = "nan";
    if (m.auc_defined()) {
      std::snprintf(buf, sizeof buf, "%.4f", m.roc_auc);
      auc = buf;
    }
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.4f,%s\n", binding_class_key(kBindingClasses[c]), m.accuracy,
                  m.f1, m.mcc, auc.c_str());
    out += buf;
  }
  return out;
}

}  // namespace egat
