#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "classifier.hpp"
#include "matrix.hpp"
#include "tsdata.hpp"

namespace tsxai {

// How perturbed cells are refilled: with a statistic of the test samples
// (Mean) or with a draw from it (Gaussian), computed either per time point
// (Local) or over the whole channel (Global).
enum class PerturbStat { Mean, Gaussian };
enum class PerturbScope { Local, Global };

struct PerturbationStrategy {
  PerturbStat stat = PerturbStat::Mean;
  PerturbScope scope = PerturbScope::Local;
};

std::string strategy_name(const PerturbationStrategy& s);  // e.g. "mean-local"
PerturbationStrategy parse_strategy(const std::string& name);
std::vector<PerturbationStrategy> all_strategies();

// Perturbation statistics of a dataset: per (channel, time point) and per
// channel, both with the n-1 standard deviation.
struct DatasetStats {
  Matrix local_mean, local_std;                 // channels x length
  std::vector<double> global_mean, global_std;  // one per channel
};

DatasetStats dataset_stats(const LabeledDataset& ds);

// Replace the ceil(fraction * d * L) most salient cells (ties broken by
// (channel, time) order) with the strategy's statistic.  Gaussian draws come
// from a stream derived from (cell_seed, channel, time), so a given cell
// receives the same draw at every fraction and under both Gaussian scopes.
// The map must be rescaled and already at full series resolution.
MultiSeries perturb_topk(const MultiSeries& x, const SaliencyMap& w, double fraction,
                         const PerturbationStrategy& strategy, const DatasetStats& stats,
                         uint64_t cell_seed);

struct AccuracyDropCurve {
  std::string explainer, referee;
  PerturbationStrategy strategy;
  std::vector<double> fractions, accuracies;
};

// Referee accuracy on the perturbed test set at each fraction, one rescaled
// full-resolution explanation per instance.  The explainer/referee ids are
// left for the caller to fill in.
AccuracyDropCurve drop_curve(const ProbClassifier& referee, const LabeledDataset& test,
                             const std::vector<SaliencyMap>& explanations,
                             const PerturbationStrategy& strategy,
                             const std::vector<double>& fractions, const DatasetStats& stats,
                             uint64_t seed);

// Normalized trapezoid area under the drop curve; lower means the accuracy
// fell faster, i.e. the explanation pointed at what the referee relied on.
double curve_auc(const AccuracyDropCurve& c);

struct AucRecord {
  std::string explainer, referee;
  PerturbationStrategy strategy;
  double auc = 0.0;
};

struct AmeeRow {
  std::string explainer;
  double avg_auc = 0.0, scaled_auc = 0.0, power = 0.0;
  int rank = 0;
};

struct AmeeReport {
  std::vector<AmeeRow> rows;                                 // sorted by rank
  std::vector<std::pair<std::string, double>> referee_clean;  // id, clean accuracy
  std::vector<std::string> excluded_referees;
};

// Average AUC per explainer across referees x strategies, min-max scaled;
// power = 1 - scaled; rank ascending by average (rank 1 = fastest drop).
AmeeReport aggregate_and_rank(const std::vector<AucRecord>& aucs);

// One explainer's maps for every test instance, any scale / segment grid;
// run_amee flattens, upsamples and rescales them itself.
struct NamedExplanations {
  std::string name;
  std::vector<SaliencyMap> maps;
};

struct AmeeConfig {
  std::vector<double> fractions;                 // empty: 0, 0.1, ..., 1.0
  std::vector<PerturbationStrategy> strategies;  // empty: all four
  int referee_kernels = 500;
  uint64_t seed = 0;
};

std::vector<double> default_fractions();

struct AmeeResult {
  AmeeReport report;
  std::vector<AccuracyDropCurve> curves;
  std::vector<std::string> warnings;
};

// Full protocol on the channel-concatenated form: train the referee trio
// (rocket+logistic, rocket+ridge, ridge on raw values) on the train split,
// exclude referees at or below the majority baseline, evaluate every
// explainer x strategy x fraction and aggregate.
AmeeResult run_amee(const LabeledDataset& train, const LabeledDataset& test,
                    const std::vector<NamedExplanations>& explainers, const AmeeConfig& cfg);

// Deterministic CSV renderings shared by the command-line tool and tests.
std::string format_amee_report(const AmeeResult& r);
std::string format_amee_curves(const std::vector<AccuracyDropCurve>& curves);

}  // namespace tsxai
