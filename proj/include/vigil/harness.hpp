#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "vigil/encoding.hpp"
#include "vigil/metrics.hpp"
#include "vigil/models.hpp"
#include "vigil/nn/adam.hpp"
#include "vigil/nn/loss.hpp"
#include "vigil/synth.hpp"

namespace vigil {

struct TrainConfig {
  double learning_rate = 1e-5;
  std::size_t batch_size = 32;
  std::size_t epochs = 250;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  std::size_t augment_count = 60;
  // The per-batch loss is summed; the optimizer consumes the summed gradient
  // scaled by 1/batch so the learning rate is batch-size independent.
  bool loss_mean = true;
  double dropout_keep = 0.8;
  std::uint32_t growth = 32;

  void validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
      throw BadConfig("split_ratio must be in (0,1)");
    if (batch_size < 1) throw BadConfig("batch_size must be >= 1");
    if (epochs < 1) throw BadConfig("epochs must be >= 1");
    if (learning_rate < 0.0) throw BadConfig("learning_rate must be >= 0");
    if (!(dropout_keep > 0.0 && dropout_keep <= 1.0))
      throw BadConfig("dropout_keep must be in (0,1]");
  }
};

struct SplitResult {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
  std::string warning;  // non-empty for degenerate stratification
};

// Stratified 80:20-style split. The train side gets exactly
// floor(n * ratio) rows, allocated per class by largest remainder; class
// members are shuffled under the seed before picking.
inline SplitResult split(const EncodedDataset& ds, double ratio, std::uint64_t seed) {
  if (ds.size() == 0) throw EmptyDataset("cannot split an empty dataset");
  if (!(ratio > 0.0 && ratio < 1.0)) throw BadConfig("split ratio must be in (0,1)");

  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t i = 0; i < ds.size(); ++i)
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  Rng rng(seed);
  const std::size_t train_target =
      static_cast<std::size_t>(std::floor(double(ds.size()) * ratio));

  std::array<std::size_t, 2> base{};
  std::array<double, 2> frac{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double ideal = double(by_class[c].size()) * ratio;
    base[c] = std::min(by_class[c].size(), static_cast<std::size_t>(std::floor(ideal)));
    frac[c] = ideal - std::floor(ideal);
    assigned += base[c];
  }
  while (assigned < train_target) {  // largest remainder, ties to class 0
    std::size_t pick = frac[0] >= frac[1] ? 0 : 1;
    if (base[pick] >= by_class[pick].size()) pick = 1 - pick;
    if (base[pick] >= by_class[pick].size()) break;
    ++base[pick];
    frac[pick] = -1.0;
    ++assigned;
  }

  SplitResult out;
  for (std::size_t c = 0; c < 2; ++c) {
    rng.shuffle(by_class[c]);
    for (std::size_t i = 0; i < by_class[c].size(); ++i)
      (i < base[c] ? out.train_indices : out.val_indices).push_back(by_class[c][i]);
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.val_indices.begin(), out.val_indices.end());

  if (by_class[0].empty() || by_class[1].empty())
    out.warning = "dataset contains a single class; stratification is degenerate";
  return out;
}

inline EncodedDataset subset(const EncodedDataset& ds, const std::vector<std::size_t>& idx) {
  EncodedDataset out;
  out.features.reserve(idx.size());
  out.labels.reserve(idx.size());
  for (std::size_t i : idx) {
    out.features.push_back(ds.features[i]);
    out.labels.push_back(ds.labels[i]);
  }
  return out;
}

struct TrainResult {
  std::vector<double> epoch_mean_loss;
  std::uint64_t optimizer_steps = 0;
};

// Runs epochs x ceil(n / batch) Adam steps with a per-epoch reshuffle.
// Throws NonFiniteLoss with the epoch index if training diverges.
template <typename T>
TrainResult train(Model<T>& model, const EncodedDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.size() == 0) throw EmptyDataset("cannot train on an empty dataset");

  std::vector<int> labels(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) labels[i] = static_cast<int>(ds.labels[i]);

  nn::AdamConfig<T> acfg;
  acfg.learning_rate = static_cast<T>(cfg.learning_rate);
  acfg.beta1 = static_cast<T>(cfg.beta1);
  acfg.beta2 = static_cast<T>(cfg.beta2);
  acfg.epsilon = static_cast<T>(cfg.epsilon);
  acfg.weight_decay = static_cast<T>(cfg.weight_decay);

  auto params = model.net.params();
  auto grads = model.net.grads();
  nn::Adam<T> opt(params, acfg);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.epoch_mean_loss.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::size_t> batch_idx(order.begin() + start, order.begin() + end);

      nn::Tensor<T> x = batch_from_features<T>(ds.features, batch_idx);
      std::vector<int> batch_labels(batch_idx.size());
      for (std::size_t i = 0; i < batch_idx.size(); ++i)
        batch_labels[i] = labels[batch_idx[i]];
      nn::Tensor<T> y = nn::one_hot<T>(batch_labels, model.classes);

      nn::Tensor<T> logits = model.net.forward(x, /*train=*/true, &rng);
      const double loss = static_cast<double>(nn::cross_entropy(logits, y));
      if (!std::isfinite(loss)) throw NonFiniteLoss(epoch);
      epoch_loss += loss;

      nn::Tensor<T> dlogits = nn::cross_entropy_grad(logits, y);
      if (cfg.loss_mean) {
        const T scale = T{1} / static_cast<T>(batch_idx.size());
        for (std::size_t i = 0; i < dlogits.size(); ++i) dlogits[i] *= scale;
      }
      model.net.zero_grad();
      model.net.backward(dlogits);
      opt.step(params, grads);
      ++result.optimizer_steps;
    }
    result.epoch_mean_loss.push_back(epoch_loss / double(ds.size()));
  }
  return result;
}

// Abnormal-class probability for every row, evaluated in inference mode.
template <typename T>
std::vector<double> abnormal_scores(Model<T>& model, const EncodedDataset& ds,
                                    std::size_t chunk = 256) {
  std::vector<double> scores;
  scores.reserve(ds.size());
  for (std::size_t start = 0; start < ds.size(); start += chunk) {
    const std::size_t end = std::min(ds.size(), start + chunk);
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    nn::Tensor<T> x = batch_from_features<T>(ds.features, idx);
    nn::Tensor<T> probs = nn::softmax(model.net.forward(x, false, nullptr));
    for (std::size_t i = 0; i < idx.size(); ++i)
      scores.push_back(static_cast<double>(probs(i, 1)));
  }
  return scores;
}

struct EvalReport {
  std::size_t total = 0;
  Confusion confusion;
  double accuracy_pct = 0.0;
  double error_rate_pct = 0.0;
  std::vector<RocPoint> roc;
  double auc = 0.0;
};

template <typename T>
EvalReport evaluate(Model<T>& model, const EncodedDataset& ds) {
  if (ds.size() == 0) throw EmptyDataset("cannot evaluate on an empty dataset");
  if (model.classes != 2) throw BadConfig("evaluation is defined for two classes");

  const std::vector<double> scores = abnormal_scores(model, ds);
  std::vector<int> labels(ds.size()), preds(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    labels[i] = static_cast<int>(ds.labels[i]);
    preds[i] = scores[i] > 0.5 ? 1 : 0;  // ties break toward the lower class
  }

  EvalReport report;
  report.total = ds.size();
  report.confusion = Confusion::from(preds, labels);
  report.accuracy_pct = report.confusion.accuracy_pct();
  report.error_rate_pct = 100.0 - report.accuracy_pct;

  bool both = false;
  for (std::size_t i = 1; i < labels.size() && !both; ++i) both = labels[i] != labels[0];
  if (both) {
    report.roc = roc_curve(scores, labels);
    report.auc = auc_trapezoid(report.roc);
  } else {
    // Degenerate single-class set: the curve collapses to the diagonal.
    report.roc = {RocPoint{std::numeric_limits<double>::infinity(), 0.0, 0.0},
                  RocPoint{-std::numeric_limits<double>::infinity(), 1.0, 1.0}};
    report.auc = 0.5;
  }
  return report;
}

// ---- Benchmark protocol -------------------------------------------------

struct TermConfig {
  std::string name;
  CohortConfig train_cohort;
  CohortConfig test_cohort;
};

struct BenchmarkConfig {
  std::vector<TermConfig> terms;
  std::vector<Arch> archs{Arch::Dnn, Arch::Lstm, Arch::Rnn, Arch::DenseLstm};
  TrainConfig train;
  std::vector<std::uint64_t> train_seeds{7};

  // Desk-scale stand-in for the two-term protocol: independent cohorts with
  // different seeds and cheater fractions, 540+60 train rows and 200 test
  // rows per term.
  static BenchmarkConfig standard() {
    BenchmarkConfig cfg;
    cfg.train.epochs = 50;
    cfg.train.augment_count = 60;

    TermConfig mid;
    mid.name = "mid-term";
    mid.train_cohort.student_count = 540;
    mid.train_cohort.cheater_fraction = 0.15;
    mid.train_cohort.seed = 42;
    mid.train_cohort.collusion_pair_count = 3;
    mid.test_cohort = mid.train_cohort;
    mid.test_cohort.student_count = 200;
    mid.test_cohort.seed = 1042;

    TermConfig fin;
    fin.name = "final-term";
    fin.train_cohort.student_count = 540;
    fin.train_cohort.cheater_fraction = 0.20;
    fin.train_cohort.seed = 43;
    fin.train_cohort.collusion_pair_count = 3;
    fin.test_cohort = fin.train_cohort;
    fin.test_cohort.student_count = 200;
    fin.test_cohort.seed = 1043;

    cfg.terms = {mid, fin};
    return cfg;
  }
};

struct TermOutcome {
  std::string term;
  EvalReport report;
};

struct BenchRun {
  Arch arch = Arch::DenseLstm;
  std::uint64_t train_seed = 0;
  std::vector<TermOutcome> terms;
  double overall_pct = 0.0;  // unweighted mean of the term accuracies
};

struct BenchmarkReport {
  std::vector<std::string> term_names;
  std::vector<BenchRun> runs;

  // Mean accuracy across seeds for one architecture and term index.
  double mean_term_accuracy(Arch arch, std::size_t term) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& run : runs)
      if (run.arch == arch) {
        sum += run.terms[term].report.accuracy_pct;
        ++count;
      }
    return count == 0 ? 0.0 : sum / double(count);
  }

  double mean_overall(Arch arch) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& run : runs)
      if (run.arch == arch) {
        sum += run.overall_pct;
        ++count;
      }
    return count == 0 ? 0.0 : sum / double(count);
  }
};

struct TermData {
  std::string name;
  EncodedDataset train;
  EncodedDataset test;
};

inline std::vector<TermData> build_term_data(const BenchmarkConfig& cfg) {
  std::vector<TermData> out;
  for (const auto& term : cfg.terms) {
    TermData data;
    data.name = term.name;
    const Cohort train_cohort = generate(term.train_cohort);
    data.train = encode_dataset(train_cohort.records, term.train_cohort.exam,
                                term.train_cohort.speed);
    augment(data.train.features, data.train.labels, cfg.train.augment_count,
            mix_seed(term.train_cohort.seed, 1));
    const Cohort test_cohort = generate(term.test_cohort);
    data.test = encode_dataset(test_cohort.records, term.test_cohort.exam,
                               term.test_cohort.speed);
    out.push_back(std::move(data));
  }
  return out;
}

// Trains every architecture on every term's train set for every seed and
// evaluates on that term's test set. Model init and shuffle streams are
// derived from (seed, arch, term) so runs are independent and reproducible.
inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, std::ostream* progress = nullptr) {
  BenchmarkReport report;
  const std::vector<TermData> terms = build_term_data(cfg);
  for (const auto& t : terms) report.term_names.push_back(t.name);

  for (std::uint64_t seed : cfg.train_seeds) {
    for (Arch arch : cfg.archs) {
      BenchRun run;
      run.arch = arch;
      run.train_seed = seed;
      double acc_sum = 0.0;
      for (std::size_t ti = 0; ti < terms.size(); ++ti) {
        const std::uint64_t salt = static_cast<std::uint64_t>(arch) * 16 + ti;
        Rng init_rng(mix_seed(seed, salt));
        Model<float> model = build_model<float>(arch, 2, cfg.train.growth,
                                                cfg.train.dropout_keep, init_rng);
        TrainConfig tcfg = cfg.train;
        tcfg.seed = mix_seed(seed, 0x1000 + salt);
        if (progress)
          *progress << "training " << to_string(arch) << " on " << terms[ti].name
                    << " (seed " << seed << ", " << tcfg.epochs << " epochs)" << std::endl;
        train(model, terms[ti].train, tcfg);
        TermOutcome outcome;
        outcome.term = terms[ti].name;
        outcome.report = evaluate(model, terms[ti].test);
        acc_sum += outcome.report.accuracy_pct;
        if (progress)
          *progress << "  " << terms[ti].name << ": accuracy "
                    << outcome.report.accuracy_pct << "%, auc " << outcome.report.auc
                    << std::endl;
        run.terms.push_back(std::move(outcome));
      }
      run.overall_pct = acc_sum / double(terms.size());
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

// Table-shaped summary: one row per architecture, one column per term plus
// the overall mean, averaged across seeds.
inline std::string format_table(const BenchmarkReport& report, const std::vector<Arch>& archs) {
  char buf[160];
  std::string out;
  out += "Network      ";
  for (const auto& name : report.term_names) {
    std::snprintf(buf, sizeof(buf), "%14s", (name + " (%)").c_str());
    out += buf;
  }
  out += "   Overall (%)\n";
  for (Arch arch : archs) {
    std::snprintf(buf, sizeof(buf), "%-13s", to_string(arch));
    out += buf;
    for (std::size_t t = 0; t < report.term_names.size(); ++t) {
      std::snprintf(buf, sizeof(buf), "%14.2f", report.mean_term_accuracy(arch, t));
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%14.2f\n", report.mean_overall(arch));
    out += buf;
  }
  return out;
}

}  // namespace vigil
