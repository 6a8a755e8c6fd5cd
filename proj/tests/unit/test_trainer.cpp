#include "egat/checkpoint.hpp"
#include "egat/dataset.hpp"
#include "egat/error.hpp"
#include "egat/gradcheck.hpp"
#include "egat/loss.hpp"
#include "egat/metrics.hpp"
#include "egat/optim.hpp"
#include "egat/predictor.hpp"
#include "egat/trainer.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace egat;
using namespace egat::test;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no egat::Error thrown";
  return ErrorCode::InvalidArgument;
}

// Labels with `positives` leading ones in column `col`, out of `rows`.
Matrix column_labels(std::size_t rows, std::size_t col, std::size_t positives) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(rows), 5);
  for (std::size_t i = 0; i < positives; ++i) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = 1.0;
  return y;
}

Example toy_example(const std::string& pdb, std::size_t residues, std::uint64_t seed) {
  const Structure s = leading_residues(pdb, residues);
  PreparedSubunit prep = prepare_subunit(s, FeatureConfig::defaults(), kDefaultNeighbors, kDefaultCutoff);
  Example ex;
  ex.id = pdb + "_" + std::to_string(seed);
  ex.input = prep.input;
  std::mt19937_64 rng(seed);
  ex.labels = Matrix::Zero(static_cast<Eigen::Index>(s.residue_count()), 5);
  for (Eigen::Index i = 0; i < ex.labels.size(); ++i) ex.labels.data()[i] = rng() % 4 == 0 ? 1.0 : 0.0;
  return ex;
}

TrainConfig tiny_config(std::size_t epochs = 2) {
  TrainConfig c;
  c.epochs = epochs;
  c.lr = 1e-3;
  c.batch = 2;
  c.checkpoint_every = 2;
  c.seed = 7;
  c.model = small_config();
  return c;
}

const FeatureConfig& features() {
  static const FeatureConfig cfg = FeatureConfig::defaults();
  return cfg;
}

TrainResult run_tiny(const std::vector<Example>& train_set, const std::vector<Example>& val_set,
                     const TrainConfig& cfg) {
  return train(train_set, val_set, cfg, features().to_json(), features().content_hash());
}

std::vector<std::uint8_t> to_bytes(const std::vector<int>& v) { return {v.begin(), v.end()}; }

double pairwise_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double credit = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        credit += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return credit / pairs;
}

}  // namespace

TEST(ClassWeights, Examples) {
  const LossConfig cfg;
  const Matrix half = class_weights(column_labels(10, 0, 5), cfg);
  EXPECT_NEAR(half(0, 0), 1.0, 1e-5);
  const Matrix tenth = class_weights(column_labels(10, 2, 1), cfg);
  EXPECT_NEAR(tenth(0, 2), 9.0, 1e-4);
  EXPECT_DOUBLE_EQ(tenth(0, 0), cfg.w_max);
  EXPECT_EQ(tenth.cols(), 5);
}

TEST(ClassWeights, LambdaScalesUnclampedWeights) {
  LossConfig one, two;
  two.lambda = 2.0;
  const Matrix y = column_labels(20, 1, 3);
  const Matrix a = class_weights(y, one), b = class_weights(y, two);
  EXPECT_DOUBLE_EQ(b(0, 1), 2.0 * a(0, 1));
  EXPECT_DOUBLE_EQ(b(0, 0), one.w_max);
}

TEST(ClassWeights, PoolsAcrossBlocks) {
  const Matrix a = column_labels(4, 3, 4), b = column_labels(4, 3, 0);
  const Matrix* blocks[] = {&a, &b};
  EXPECT_NEAR(class_weights(blocks, LossConfig{})(0, 3), 1.0, 1e-5);
}

TEST(ClassWeights, InvalidConfig) {
  LossConfig bad;
  bad.lambda = 0.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidArgument);
  LossConfig wmax;
  wmax.w_max = 0.5;
  EXPECT_EQ(code_of([&] { wmax.validate(); }), ErrorCode::InvalidArgument);
}

TEST(WeightedBce, SingleActiveClassAtZeroLogit) {
  const Var z = Var::constant((Matrix(1, 5) << 0, -20, -20, -20, -20).finished());
  const Matrix y = (Matrix(1, 5) << 1, 0, 0, 0, 0).finished();
  const double loss = weighted_bce(z, y, Matrix::Ones(1, 5)).item();
  EXPECT_NEAR(loss, std::log(2.0) + 4.0 * std::log1p(std::exp(-20.0)), 1e-14);
  EXPECT_NEAR(loss, 0.6931, 1e-4);
}

TEST(WeightedBce, SaturatedCorrectPredictions) {
  const Var z = Var::constant((Matrix(2, 5) << 30, -30, -30, 30, -30, -30, 30, -30, -30, 30).finished());
  const Matrix y = (Matrix(2, 5) << 1, 0, 0, 1, 0, 0, 1, 0, 0, 1).finished();
  EXPECT_LE(weighted_bce(z, y, Matrix::Constant(1, 5, 3.0)).item(), 1e-10);
}

TEST(WeightedBce, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  Matrix zv(6, 5), y(6, 5);
  for (Eigen::Index i = 0; i < zv.size(); ++i) {
    zv.data()[i] = u(rng);
    y.data()[i] = rng() % 3 == 0;
  }
  Var z = Var::parameter(zv);
  const Matrix w = (Matrix(1, 5) << 1, 9, 0.5, 100, 2).finished();
  GradCheckOptions opts;
  opts.floor = 0.0;
  EXPECT_LE(finite_diff_check([&] { return weighted_bce(z, y, w); }, {z}, opts).max_relative_error, 1e-5);
}

TEST(WeightedBce, StableFormMatchesLiteral) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix z(8, 5), y(8, 5);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z.data()[i] = u(rng);
      y.data()[i] = rng() % 2;
    }
    const Matrix w = class_weights(y, LossConfig{});
    EXPECT_NEAR(weighted_bce(Var::constant(z), y, w).item(), weighted_bce_literal(z, y, w), 1e-8);
  }
}

TEST(WeightedBce, ShapeMismatch) {
  EXPECT_EQ(code_of([] { weighted_bce(Var::constant(Matrix::Zero(2, 5)), Matrix::Zero(3, 5), Matrix::Ones(1, 5)); }),
            ErrorCode::ShapeMismatch);
}

TEST(Metrics, PairwiseExample) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const auto y = to_bytes({0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(roc_auc(s, y), 0.75);
}

TEST(Metrics, PerfectSeparation) {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  const auto y = to_bytes({0, 0, 1, 1});
  const ClassMetrics m = compute_metrics(s, y);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.f1, 1.0);
  EXPECT_DOUBLE_EQ(m.mcc, 1.0);
  EXPECT_DOUBLE_EQ(m.roc_auc, 1.0);
}

TEST(Metrics, AllPositivePredictions) {
  const std::vector<double> s{0.6, 0.7, 0.9, 0.55};
  const auto y = to_bytes({1, 0, 1, 0});
  const ClassMetrics m = compute_metrics(s, y);
  EXPECT_EQ(m.tp, 2u);
  EXPECT_EQ(m.fp, 2u);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.mcc, 0.0);
}

TEST(Metrics, ThresholdIsInclusive) {
  const std::vector<double> s{0.5, 0.49};
  const auto y = to_bytes({1, 0});
  const ClassMetrics m = compute_metrics(s, y, 0.5);
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.tn, 1u);
}

TEST(Metrics, SingleClassLabelsLeaveAucUndefined) {
  const std::vector<double> s{0.2, 0.9};
  const auto y = to_bytes({0, 0});
  const ClassMetrics m = compute_metrics(s, y);
  EXPECT_FALSE(m.auc_defined());
  EXPECT_DOUBLE_EQ(m.mcc, 0.0);
  MetricsReport r;
  for (auto& c : r) c = m;
  EXPECT_TRUE(std::isnan(mean_auc(r)));
  r[1].roc_auc = 0.8;
  EXPECT_DOUBLE_EQ(mean_auc(r), 0.8);
}

TEST(Metrics, AucMatchesPairwiseOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial % 2 ? static_cast<double>(rng() % 11) / 10.0 : static_cast<double>(rng() % 1000000) / 1e6;
      y[i] = static_cast<std::uint8_t>(rng() % 3 == 0);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(roc_auc(s, y), pairwise_auc(s, y), 1e-12) << trial;
  }
}

TEST(Metrics, MatthewsFormula) {
  for (std::size_t tp : {0u, 3u, 10u})
    for (std::size_t fp : {0u, 2u})
      for (std::size_t tn : {0u, 7u})
        for (std::size_t fn : {0u, 4u}) {
          const double den = std::sqrt(static_cast<double>((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)));
          const double expected =
              den == 0.0 ? 0.0
                         : (static_cast<double>(tp * tn) - static_cast<double>(fp * fn)) / den;
          EXPECT_NEAR(matthews(tp, fp, tn, fn), expected, 1e-15);
        }
}

TEST(Metrics, CsvLayout) {
  MetricsReport r{};
  for (auto& c : r) {
    c.accuracy = 0.5;
    c.f1 = 0.25;
    c.mcc = -0.125;
    c.roc_auc = 0.75;
  }
  r[4].roc_auc = std::numeric_limits<double>::quiet_NaN();
  const std::string csv = metrics_csv(r);
  EXPECT_EQ(csv,
            "category,accuracy,f1,mcc,roc_auc\n"
            "protein,0.5000,0.2500,-0.1250,0.7500\n"
            "dna_rna,0.5000,0.2500,-0.1250,0.7500\n"
            "ion,0.5000,0.2500,-0.1250,0.7500\n"
            "ligand,0.5000,0.2500,-0.1250,0.7500\n"
            "lipid,0.5000,0.2500,-0.1250,nan\n");
}

TEST(Optimizer, SingleAdamStepDecreasesLoss) {
  const Example ex = toy_example("1ubi", 8, 1);
  const Matrix w = class_weights(ex.labels, LossConfig{});
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Model m = Model::initialize(small_config(), seed);
    double before = 0.0;
    {
      Tape tape;
      const Var loss = weighted_bce(forward(m, ex.input).logits, ex.labels, w);
      before = loss.item();
      tape.backward(loss);
    }
    AdamState state;
    adam_step(m.parameters(), state, 1e-5);
    NoGradGuard no_grad;
    const double after = weighted_bce(forward(m, ex.input).logits, ex.labels, w).item();
    decreased += after < before;
  }
  EXPECT_GE(decreased, 18);
}

TEST(TrainLog, CompactNumbersAndHeader) {
  EXPECT_EQ(format_compact(1e-5), "1e-5");
  EXPECT_EQ(format_compact(0.001), "0.001");
  EXPECT_EQ(format_compact(100), "100");
  EXPECT_EQ(format_compact(2.5e-7), "2.5e-7");
  TrainConfig c;
  const std::string header = train_log_header(c);
  EXPECT_NE(header.find("(epochs=100, lr=1e-5, batch=8, checkpoint_every=1000)"), std::string::npos);
  EXPECT_NE(header.find("step,epoch,train_loss,val_loss,checkpoint_path"), std::string::npos);
}

TEST(Train, DeterministicForFixedSeed) {
  const std::vector<Example> tr{toy_example("1ubi", 6, 1), toy_example("1ejg", 5, 2), toy_example("1ake", 6, 3)};
  const std::vector<Example> va{toy_example("1ubi", 4, 4)};
  const TrainResult a = run_tiny(tr, va, tiny_config());
  const TrainResult b = run_tiny(tr, va, tiny_config());
  ASSERT_EQ(a.steps.size(), 4u);
  EXPECT_EQ(a.log_csv, b.log_csv);
  for (std::size_t i = 0; i < a.steps.size(); ++i) EXPECT_EQ(a.steps[i].train_loss, b.steps[i].train_loss);
  TrainConfig other = tiny_config();
  other.seed = 8;
  EXPECT_NE(run_tiny(tr, va, other).log_csv, a.log_csv);
}

TEST(Train, OneValidationEntryPerEpochAndBestMarker) {
  TempDir dir;
  const std::vector<Example> tr{toy_example("1ubi", 6, 1), toy_example("1ejg", 5, 2), toy_example("1ake", 6, 3)};
  const std::vector<Example> va{toy_example("1ubi", 4, 4)};
  TrainConfig cfg = tiny_config(3);
  cfg.out_dir = dir.path();
  const TrainResult r = run_tiny(tr, va, cfg);
  EXPECT_EQ(r.epoch_val_loss.size(), 3u);
  EXPECT_EQ(r.steps.size(), 6u);
  ASSERT_EQ(r.checkpoints.size(), 3u);
  ASSERT_TRUE(r.best.has_value());
  for (const auto& c : r.checkpoints) {
    EXPECT_LE(r.checkpoints[*r.best].val_loss, c.val_loss);
    EXPECT_TRUE(std::filesystem::exists(dir.file(c.path)));
  }

  std::size_t val_rows = 0, step_rows = 0;
  std::istringstream log(read_text(dir.file("train_log.csv")));
  std::string line;
  while (std::getline(log, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("step,", 0) == 0) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) f.push_back(field);
    f.resize(5);
    if (!f[2].empty()) ++step_rows;
    if (!f[3].empty()) ++val_rows;
  }
  EXPECT_EQ(val_rows, 3u);
  EXPECT_EQ(step_rows, 6u);

  const std::string best = read_text(dir.file("best.txt"));
  EXPECT_EQ(best.substr(0, best.find('\t')), r.checkpoints[*r.best].path);
  EXPECT_EQ(read_text(dir.file("best.egat")), read_text(dir.file(r.checkpoints[*r.best].path)));
  EXPECT_EQ(load_checkpoint(dir.file("best.egat")).step, static_cast<std::int64_t>(r.checkpoints[*r.best].step));
}

TEST(Train, EmptySplitsAreRejected) {
  const std::vector<Example> some{toy_example("1ubi", 4, 1)};
  EXPECT_EQ(code_of([&] { run_tiny({}, some, tiny_config()); }), ErrorCode::EmptySplit);
  EXPECT_EQ(code_of([&] { run_tiny(some, {}, tiny_config()); }), ErrorCode::EmptySplit);
  EXPECT_EQ(code_of([&] { evaluate(Model::initialize(small_config(), 0), {}); }), ErrorCode::EmptySplit);
}

TEST(Train, NonFiniteLossDumpsBatch) {
  TempDir dir;
  Example bad = toy_example("1ejg", 4, 9);
  bad.id = "poisoned";
  bad.input.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const std::vector<Example> tr{toy_example("1ubi", 5, 1), bad};
  TrainConfig cfg = tiny_config();
  cfg.batch = 1;
  cfg.out_dir = dir.path();
  EXPECT_EQ(code_of([&] { run_tiny(tr, {toy_example("1ubi", 3, 2)}, cfg); }), ErrorCode::NonFinite);
  bool dumped = false;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    const std::string name = e.path().filename().string();
    if (name.rfind("nonfinite_step", 0) != 0) continue;
    dumped = true;
    EXPECT_NE(read_text(e.path().string()).find("poisoned"), std::string::npos);
  }
  EXPECT_TRUE(dumped);
}

TEST(Evaluate, UndefinedAucAndDeterminism) {
  Example ex = toy_example("1ubi", 10, 3);
  ex.labels.col(4).setZero();
  const Model m = Model::initialize(small_config(), 5);
  const MetricsReport a = evaluate(m, {ex});
  const MetricsReport b = evaluate(m, {ex});
  EXPECT_FALSE(a[4].auc_defined());
  EXPECT_EQ(metrics_csv(a), metrics_csv(b));
  EXPECT_EQ(code_of([&] { evaluate(m, {ex}, 1.5); }), ErrorCode::InvalidArgument);
}

TEST(Evaluate, MemorizedSplitFromShippedCheckpoint) {
  const Model m = load_checkpoint(source_path("data/toy_checkpoint.egat"));
  const MetricsReport r =
      evaluate_manifest(m, source_path("data/manifests/toy_memorized.tsv"), Split::Test);
  for (std::size_t c = 0; c < kNumBindingClasses; ++c)
    if (r[c].auc_defined()) EXPECT_GE(r[c].roc_auc, 0.95) << binding_class_key(static_cast<BindingClass>(c));
  EXPECT_TRUE(r[class_index(BindingClass::Protein)].auc_defined());
  EXPECT_TRUE(r[class_index(BindingClass::NucleicAcid)].auc_defined());
  EXPECT_TRUE(r[class_index(BindingClass::Ligand)].auc_defined());
}

TEST(Manifest, ParsingRules) {
  const auto entries = parse_manifest(
      "# comment\n\n"
      "structures/1abc.pdb\tA\ttrain\n"
      "/abs/2xyz.pdb\tA,B\tval\n"
      "3def.pdb\tC\ttest\n",
      "/data");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].path, "/data/structures/1abc.pdb");
  EXPECT_EQ(entries[0].structure_id, "1abc");
  EXPECT_EQ(entries[1].path, "/abs/2xyz.pdb");
  EXPECT_EQ(entries[1].chains, (std::vector<char>{'A', 'B'}));
  EXPECT_EQ(entries[2].split, Split::Test);
  EXPECT_EQ(entries_for(entries, Split::Val).size(), 1u);
  EXPECT_EQ(parse_split("val"), Split::Val);
  EXPECT_STREQ(split_name(Split::Train), "train");
}

TEST(Manifest, MalformedInput) {
  EXPECT_EQ(code_of([] { parse_manifest("a.pdb\tA\tholdout\n"); }), ErrorCode::ManifestError);
  EXPECT_EQ(code_of([] { parse_manifest("a.pdb\tA\n"); }), ErrorCode::ManifestError);
  EXPECT_EQ(code_of([] { parse_manifest("a.pdb\tA\ttrain\nsub/a.pdb\tB\ttest\n"); }), ErrorCode::ManifestError);
  EXPECT_EQ(code_of([] { parse_split("dev"); }), ErrorCode::ManifestError);
}

TEST(Manifest, ToyManifestBuildsLabelledExamples) {
  const auto entries = load_manifest(source_path("data/manifests/toy.tsv"));
  EXPECT_EQ(entries_for(entries, Split::Train).size(), 5u);
  const auto ex = make_examples(entries_for(entries, Split::Val), features(), kDefaultNeighbors, kDefaultCutoff);
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].labels.rows(), 76);
  EXPECT_EQ(ex[0].input.residue_count, 76u);
}
