#include "amee.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "error.hpp"
#include "io.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace tsxai {

std::string strategy_name(const PerturbationStrategy& s) {
  std::string out = s.stat == PerturbStat::Mean ? "mean" : "gaussian";
  out += s.scope == PerturbScope::Local ? "-local" : "-global";
  return out;
}

PerturbationStrategy parse_strategy(const std::string& name) {
  for (const auto& s : all_strategies())
    if (strategy_name(s) == name) return s;
  throw DomainError("unknown perturbation strategy '" + name +
                    "' (want mean-local, mean-global, gaussian-local or gaussian-global)");
}

std::vector<PerturbationStrategy> all_strategies() {
  return {{PerturbStat::Mean, PerturbScope::Local},
          {PerturbStat::Mean, PerturbScope::Global},
          {PerturbStat::Gaussian, PerturbScope::Local},
          {PerturbStat::Gaussian, PerturbScope::Global}};
}

DatasetStats dataset_stats(const LabeledDataset& ds) {
  int n = ds.size();
  if (n < 2) throw DomainError("perturbation statistics need at least two instances");
  int d = ds.channels(), L = ds.length();

  DatasetStats st;
  st.local_mean = Matrix(d, L);
  st.local_std = Matrix(d, L);
  st.global_mean.assign(static_cast<size_t>(d), 0.0);
  st.global_std.assign(static_cast<size_t>(d), 0.0);

  for (int c = 0; c < d; ++c) {
    for (int t = 0; t < L; ++t) {
      double m = 0.0;
      for (int i = 0; i < n; ++i) m += ds.instance(i).at(c, t);
      m /= n;
      double ss = 0.0;
      for (int i = 0; i < n; ++i) {
        double dev = ds.instance(i).at(c, t) - m;
        ss += dev * dev;
      }
      st.local_mean(c, t) = m;
      st.local_std(c, t) = std::sqrt(ss / (n - 1));
    }
    double count = static_cast<double>(n) * L;
    double gm = 0.0;
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < L; ++t) gm += ds.instance(i).at(c, t);
    gm /= count;
    double gss = 0.0;
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < L; ++t) {
        double dev = ds.instance(i).at(c, t) - gm;
        gss += dev * dev;
      }
    st.global_mean[static_cast<size_t>(c)] = gm;
    st.global_std[static_cast<size_t>(c)] = std::sqrt(gss / (count - 1.0));
  }
  return st;
}

MultiSeries perturb_topk(const MultiSeries& x, const SaliencyMap& w, double fraction,
                         const PerturbationStrategy& strategy, const DatasetStats& stats,
                         uint64_t cell_seed) {
  int d = x.channels(), L = x.length();
  if (w.scale() != Scale::Rescaled0to100)
    throw NotRescaled("perturbation needs a rescaled saliency map");
  if (w.channels() != d || w.segments() != L)
    throw ShapeMismatch("saliency map is " + std::to_string(w.channels()) + "x" +
                        std::to_string(w.segments()) + " but the series is " + std::to_string(d) +
                        "x" + std::to_string(L) + "; upsample it first");
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw DomainError("fraction must lie in [0,1], got " + format_double(fraction));
  if (stats.local_mean.rows() != d || stats.local_mean.cols() != L)
    throw ShapeMismatch("statistics shape does not match the series");

  int64_t cells = static_cast<int64_t>(d) * L;
  // Guard against 0.1 * 2000 landing a hair above 200 and ceiling to 201.
  int64_t k = static_cast<int64_t>(std::ceil(fraction * static_cast<double>(cells) - 1e-9));
  k = std::clamp<int64_t>(k, 0, cells);

  Matrix out = x.values();
  if (k == 0) return MultiSeries(std::move(out));

  const double* wv = w.weights().data();
  std::vector<int64_t> order(static_cast<size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  // stable sort keeps equal weights in (channel, time) order
  std::stable_sort(order.begin(), order.end(),
                   [wv](int64_t a, int64_t b) { return wv[a] > wv[b]; });

  for (int64_t r = 0; r < k; ++r) {
    int64_t idx = order[static_cast<size_t>(r)];
    int c = static_cast<int>(idx / L), t = static_cast<int>(idx % L);
    double mean, sd;
    if (strategy.scope == PerturbScope::Local) {
      mean = stats.local_mean(c, t);
      sd = stats.local_std(c, t);
    } else {
      mean = stats.global_mean[static_cast<size_t>(c)];
      sd = stats.global_std[static_cast<size_t>(c)];
    }
    if (strategy.stat == PerturbStat::Mean) {
      out(c, t) = mean;
    } else {
      Rng cell(derive_seed(cell_seed, {static_cast<uint64_t>(c), static_cast<uint64_t>(t)}));
      out(c, t) = mean + sd * cell.normal();
    }
  }
  return MultiSeries(std::move(out));
}

AccuracyDropCurve drop_curve(const ProbClassifier& referee, const LabeledDataset& test,
                             const std::vector<SaliencyMap>& explanations,
                             const PerturbationStrategy& strategy,
                             const std::vector<double>& fractions, const DatasetStats& stats,
                             uint64_t seed) {
  int n = test.size();
  if (static_cast<int>(explanations.size()) != n)
    throw ShapeMismatch("need one explanation per test instance, got " +
                        std::to_string(explanations.size()) + " for " + std::to_string(n));

  AccuracyDropCurve curve;
  curve.strategy = strategy;
  curve.fractions = fractions;
  curve.accuracies.resize(fractions.size());

  std::vector<int> preds(static_cast<size_t>(n));
  for (size_t fi = 0; fi < fractions.size(); ++fi) {
    double f = fractions[fi];
    parallel_for(n, [&](int64_t i) {
      MultiSeries p =
          perturb_topk(test.instance(static_cast<int>(i)), explanations[static_cast<size_t>(i)],
                       f, strategy, stats, derive_seed(seed, {static_cast<uint64_t>(i)}));
      preds[static_cast<size_t>(i)] = referee.predict(p);
    });
    int correct = 0;
    for (int i = 0; i < n; ++i)
      if (preds[static_cast<size_t>(i)] == test.label(i)) ++correct;
    curve.accuracies[fi] = static_cast<double>(correct) / n;
  }
  return curve;
}

double curve_auc(const AccuracyDropCurve& c) {
  size_t m = c.fractions.size();
  if (m < 2) throw DomainError("curve needs at least two fractions");
  if (c.accuracies.size() != m) throw ShapeMismatch("curve has mismatched fraction/accuracy lists");
  double area = 0.0;
  for (size_t i = 1; i < m; ++i) {
    double df = c.fractions[i] - c.fractions[i - 1];
    if (df <= 0.0) throw DomainError("fractions must be strictly increasing");
    area += 0.5 * (c.accuracies[i] + c.accuracies[i - 1]) * df;
  }
  return area / (c.fractions.back() - c.fractions.front());
}

AmeeReport aggregate_and_rank(const std::vector<AucRecord>& aucs) {
  // group by explainer, first-appearance order
  std::vector<std::string> names;
  std::vector<double> sums;
  std::vector<int> counts;
  for (const auto& rec : aucs) {
    size_t g = 0;
    while (g < names.size() && names[g] != rec.explainer) ++g;
    if (g == names.size()) {
      names.push_back(rec.explainer);
      sums.push_back(0.0);
      counts.push_back(0);
    }
    sums[g] += rec.auc;
    ++counts[g];
  }
  size_t e = names.size();
  if (e < 2) throw DomainError("ranking needs at least two explainers");

  std::vector<double> avg(e);
  for (size_t g = 0; g < e; ++g) avg[g] = sums[g] / counts[g];
  double lo = *std::min_element(avg.begin(), avg.end());
  double hi = *std::max_element(avg.begin(), avg.end());
  if (hi == lo) throw DegenerateSpread("all explainers share the same average AUC");

  std::vector<size_t> by_avg(e);
  std::iota(by_avg.begin(), by_avg.end(), 0);
  std::stable_sort(by_avg.begin(), by_avg.end(),
                   [&avg](size_t a, size_t b) { return avg[a] < avg[b]; });

  AmeeReport rep;
  rep.rows.resize(e);
  for (size_t pos = 0; pos < e; ++pos) {
    size_t g = by_avg[pos];
    AmeeRow& row = rep.rows[pos];
    row.explainer = names[g];
    row.avg_auc = avg[g];
    row.scaled_auc = (avg[g] - lo) / (hi - lo);
    row.power = 1.0 - row.scaled_auc;
    row.rank = static_cast<int>(pos) + 1;
  }
  return rep;
}

std::vector<double> default_fractions() {
  std::vector<double> f;
  for (int i = 0; i <= 10; ++i) f.push_back(i / 10.0);
  return f;
}

namespace {

// Row-major flatten, repeat each weight to fill the concatenated grid, then
// rescale.  Segment upsampling by repetition is the inverse of mean pooling.
SaliencyMap upsample_flat(const SaliencyMap& map, int64_t cells) {
  const Matrix& mw = map.weights();
  int64_t src = static_cast<int64_t>(mw.rows()) * mw.cols();
  if (src <= 0 || cells % src != 0)
    throw ShapeMismatch("cannot upsample " + std::to_string(src) + " weights to " +
                        std::to_string(cells) + " cells");
  int64_t rep = cells / src;
  Matrix up(1, static_cast<int>(cells));
  int64_t k = 0;
  for (int r = 0; r < mw.rows(); ++r)
    for (int c = 0; c < mw.cols(); ++c) {
      double v = mw(r, c);
      for (int64_t j = 0; j < rep; ++j) up(0, static_cast<int>(k++)) = v;
    }
  return rescale_abs_minmax(SaliencyMap(std::move(up), Scale::Raw));
}

}  // namespace

AmeeResult run_amee(const LabeledDataset& train, const LabeledDataset& test,
                    const std::vector<NamedExplanations>& explainers, const AmeeConfig& cfg) {
  if (explainers.size() < 2) throw DomainError("need at least two explainers to rank");
  int n = test.size();
  int64_t cells = static_cast<int64_t>(test.channels()) * test.length();
  for (size_t a = 0; a < explainers.size(); ++a) {
    if (static_cast<int>(explainers[a].maps.size()) != n)
      throw ShapeMismatch("explainer '" + explainers[a].name + "' has " +
                          std::to_string(explainers[a].maps.size()) + " maps for " +
                          std::to_string(n) + " test instances");
    for (size_t b = a + 1; b < explainers.size(); ++b)
      if (explainers[a].name == explainers[b].name)
        throw DomainError("duplicate explainer name '" + explainers[a].name + "'");
  }

  std::vector<double> fractions = cfg.fractions.empty() ? default_fractions() : cfg.fractions;
  std::vector<PerturbationStrategy> strategies =
      cfg.strategies.empty() ? all_strategies() : cfg.strategies;

  LabeledDataset ctrain = concat_channels(train);
  LabeledDataset ctest = concat_channels(test);
  DatasetStats stats = dataset_stats(ctest);

  struct Referee {
    std::string name;
    std::unique_ptr<ProbClassifier> model;
    double clean = 0.0;
  };
  std::vector<Referee> referees;
  {
    RocketLogisticModel::Config lc;
    lc.n_kernels = cfg.referee_kernels;
    lc.seed = derive_seed(cfg.seed, {0x7e1, 0});
    referees.push_back({"rocket-logistic",
                        std::make_unique<RocketLogisticModel>(RocketLogisticModel::train(ctrain, lc)),
                        0.0});
    referees.push_back({"rocket-ridge",
                        std::make_unique<RocketRidgeModel>(RocketRidgeModel::train(
                            ctrain, cfg.referee_kernels, derive_seed(cfg.seed, {0x7e1, 1}))),
                        0.0});
    referees.push_back(
        {"ridge-concat", std::make_unique<RidgeConcatModel>(RidgeConcatModel::train(ctrain)), 0.0});
  }

  std::vector<int> class_counts(static_cast<size_t>(test.n_classes()), 0);
  for (int i = 0; i < n; ++i) ++class_counts[static_cast<size_t>(test.label(i))];
  double majority =
      static_cast<double>(*std::max_element(class_counts.begin(), class_counts.end())) / n;

  AmeeResult res;
  std::vector<size_t> kept;
  for (size_t r = 0; r < referees.size(); ++r) {
    referees[r].clean = referees[r].model->accuracy(ctest);
    res.report.referee_clean.emplace_back(referees[r].name, referees[r].clean);
    if (referees[r].clean > majority) {
      kept.push_back(r);
    } else {
      res.report.excluded_referees.push_back(referees[r].name);
      res.warnings.push_back("referee " + referees[r].name + " scored " +
                             format_double(referees[r].clean) +
                             ", not above the majority baseline " + format_double(majority) +
                             "; excluded");
    }
  }
  if (kept.empty())
    throw DegenerateSpread("every referee fell at or below the majority baseline " +
                           format_double(majority));

  uint64_t pseed = derive_seed(cfg.seed, {0x9e27});
  std::vector<AucRecord> aucs;
  for (const auto& ex : explainers) {
    std::vector<SaliencyMap> maps;
    maps.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) maps.push_back(upsample_flat(ex.maps[static_cast<size_t>(i)], cells));
    for (const auto& strat : strategies) {
      for (size_t r : kept) {
        AccuracyDropCurve c =
            drop_curve(*referees[r].model, ctest, maps, strat, fractions, stats, pseed);
        c.explainer = ex.name;
        c.referee = referees[r].name;
        aucs.push_back({ex.name, referees[r].name, strat, curve_auc(c)});
        res.curves.push_back(std::move(c));
      }
    }
  }

  AmeeReport ranked = aggregate_and_rank(aucs);
  ranked.referee_clean = std::move(res.report.referee_clean);
  ranked.excluded_referees = std::move(res.report.excluded_referees);
  res.report = std::move(ranked);
  return res;
}

std::string format_amee_report(const AmeeResult& r) {
  std::string out;
  out += "# amee report\n";
  out +=
      "# referee set: rocket-logistic, rocket-ridge, ridge-concat "
      "(in-repo substitutes for AMEE's usual external referees)\n";
  for (const auto& [name, acc] : r.report.referee_clean)
    out += "# referee_clean_accuracy," + name + "," + format_double(acc) + "\n";
  out += "# excluded_referees,";
  if (r.report.excluded_referees.empty()) {
    out += "none";
  } else {
    for (size_t i = 0; i < r.report.excluded_referees.size(); ++i) {
      if (i) out += ";";
      out += r.report.excluded_referees[i];
    }
  }
  out += "\n";
  out += "explainer,average_auc,scaled_auc,explanation_power,rank\n";
  for (const auto& row : r.report.rows)
    out += row.explainer + "," + format_double(row.avg_auc) + "," + format_double(row.scaled_auc) +
           "," + format_double(row.power) + "," + std::to_string(row.rank) + "\n";
  return out;
}

std::string format_amee_curves(const std::vector<AccuracyDropCurve>& curves) {
  std::string out = "explainer,referee,strategy,fraction,accuracy\n";
  for (const auto& c : curves)
    for (size_t i = 0; i < c.fractions.size(); ++i)
      out += c.explainer + "," + c.referee + "," + strategy_name(c.strategy) + "," +
             format_double(c.fractions[i]) + "," + format_double(c.accuracies[i]) + "\n";
  return out;
}

}  // namespace tsxai
