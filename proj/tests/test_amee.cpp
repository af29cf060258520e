#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "amee.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "synthgen.hpp"
#include "tsdata.hpp"

using namespace tsxai;

namespace {

LabeledDataset two_instance_set(double v) {
  // mirror-image pair: every statistic is known in closed form
  Matrix a(2, 3), b(2, 3);
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 3; ++t) {
      double base = 10.0 * c + t;
      a(c, t) = base + v;
      b(c, t) = base - v;
    }
  return LabeledDataset({MultiSeries(a), MultiSeries(b)}, {0, 1}, 2);
}

SaliencyMap rescaled_row(const std::vector<double>& vals, int d, int L) {
  Matrix w(d, L);
  for (int c = 0; c < d; ++c)
    for (int t = 0; t < L; ++t) w(c, t) = vals[static_cast<size_t>(c * L + t)];
  return rescale_abs_minmax(SaliencyMap(w, Scale::Raw));
}

// a one-rule referee for drop-curve oracles: class = sign of cell (0, 0)
class CellSignReferee : public ProbClassifier {
 public:
  std::vector<double> predict_proba(const MultiSeries& x) const override {
    return x.at(0, 0) > 0.0 ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0};
  }
  int n_classes() const override { return 2; }
};

}  // namespace

TEST_CASE("strategy names round-trip") {
  for (const auto& s : all_strategies()) CHECK(strategy_name(parse_strategy(strategy_name(s))) ==
                                               strategy_name(s));
  CHECK(all_strategies().size() == 4);
  CHECK(strategy_name({PerturbStat::Mean, PerturbScope::Local}) == "mean-local");
  CHECK(strategy_name({PerturbStat::Gaussian, PerturbScope::Global}) == "gaussian-global");
  CHECK_THROWS_AS(parse_strategy("median-local"), DomainError);
}

TEST_CASE("dataset statistics have their closed forms on a mirror pair") {
  LabeledDataset ds = two_instance_set(2.0);
  DatasetStats st = dataset_stats(ds);
  // two samples base+v, base-v: mean = base, sd (n-1) = sqrt(2) * v
  double sd = std::sqrt(2.0) * 2.0;
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 3; ++t) {
      CHECK(st.local_mean(c, t) == 10.0 * c + t);
      CHECK(st.local_std(c, t) == doctest::Approx(sd).epsilon(1e-12));
    }
  // per channel: values base(c,t) +/- v over all t; mean = avg base = 10c + 1
  for (int c = 0; c < 2; ++c) {
    CHECK(st.global_mean[static_cast<size_t>(c)] == doctest::Approx(10.0 * c + 1.0));
    // E[x^2] over the 6 channel values: mean of (base+-v)^2
    double m = 10.0 * c + 1.0;
    double ex2 = 0.0;
    for (int t = 0; t < 3; ++t) {
      double base = 10.0 * c + t;
      ex2 += (base + 2.0) * (base + 2.0) + (base - 2.0) * (base - 2.0);
    }
    ex2 /= 6.0;
    double var = (ex2 - m * m) * 6.0 / 5.0;  // n-1 correction
    CHECK(st.global_std[static_cast<size_t>(c)] == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  }
}

TEST_CASE("dataset statistics need two instances") {
  Matrix a(1, 2, 1.0);
  CHECK_THROWS_AS(dataset_stats(LabeledDataset({MultiSeries(a)}, {0}, 2)), DomainError);
}

TEST_CASE("perturbation replaces exactly the top-k cells in (c,t) tie order") {
  Matrix xv(1, 10);
  for (int t = 0; t < 10; ++t) xv(0, t) = 100.0 + t;
  MultiSeries x(xv);

  Matrix s1(1, 10), s2(1, 10);
  for (int t = 0; t < 10; ++t) {
    s1(0, t) = t;
    s2(0, t) = -static_cast<double>(t);
  }
  LabeledDataset ds({MultiSeries(s1), MultiSeries(s2)}, {0, 1}, 2);
  DatasetStats st = dataset_stats(ds);

  // saliency: cells 3 and 7 stand out, everything else is tied at zero
  std::vector<double> w(10, 0.0);
  w[3] = 2.0;
  w[7] = 1.0;
  SaliencyMap map = rescaled_row(w, 1, 10);

  // fraction 0.2 of 10 cells: exactly cells {3, 7}
  MultiSeries out = perturb_topk(x, map, 0.2, {PerturbStat::Mean, PerturbScope::Local}, st, 0);
  for (int t = 0; t < 10; ++t) {
    double want = (t == 3 || t == 7) ? st.local_mean(0, t) : x.at(0, t);
    CHECK(out.at(0, t) == want);
  }

  // fraction 0.5: cells {3, 7} then ties resolved in (c,t) order: 0, 1, 2
  MultiSeries half = perturb_topk(x, map, 0.5, {PerturbStat::Mean, PerturbScope::Local}, st, 0);
  for (int t = 0; t < 10; ++t) {
    bool hit = t == 3 || t == 7 || t == 0 || t == 1 || t == 2;
    CHECK(half.at(0, t) == (hit ? st.local_mean(0, t) : x.at(0, t)));
  }

  // fraction 0 leaves the series alone; fraction 1 replaces everything
  MultiSeries none = perturb_topk(x, map, 0.0, {PerturbStat::Mean, PerturbScope::Local}, st, 0);
  CHECK(none.values() == x.values());
  MultiSeries all = perturb_topk(x, map, 1.0, {PerturbStat::Mean, PerturbScope::Local}, st, 0);
  for (int t = 0; t < 10; ++t) CHECK(all.at(0, t) == st.local_mean(0, t));
}

TEST_CASE("the top-k count survives floating-point fractions") {
  // 0.1 * 2000 cells must be exactly 200, not 201
  Matrix xv(20, 100, 1.0);
  Matrix wv(20, 100, 0.0);
  wv(0, 0) = 100.0;
  SaliencyMap w(wv, Scale::Rescaled0to100);
  Matrix a(20, 100, 1.0), b(20, 100, -1.0);
  DatasetStats st = dataset_stats(LabeledDataset({MultiSeries(a), MultiSeries(b)}, {0, 1}, 2));
  MultiSeries x(xv);
  for (double f : {0.1, 0.05, 0.3}) {
    MultiSeries out = perturb_topk(x, w, f, {PerturbStat::Mean, PerturbScope::Local}, st, 0);
    int changed = 0;
    for (int c = 0; c < 20; ++c)
      for (int t = 0; t < 100; ++t)
        if (out.at(c, t) != x.at(c, t)) ++changed;
    CHECK(changed == static_cast<int>(f * 2000 + 0.5));
  }
}

TEST_CASE("gaussian refills share the cell draw across scopes and fractions") {
  Matrix xv(2, 4, 5.0);
  MultiSeries x(xv);
  Matrix a(2, 4), b(2, 4);
  Rng rng(9);
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 4; ++t) {
      a(c, t) = rng.normal();
      b(c, t) = rng.normal() + 1.0;
    }
  DatasetStats st = dataset_stats(LabeledDataset({MultiSeries(a), MultiSeries(b)}, {0, 1}, 2));

  Matrix wv(2, 4, 0.0);
  wv(0, 0) = 100.0;
  wv(1, 3) = 60.0;
  SaliencyMap w(wv, Scale::Rescaled0to100);

  uint64_t cell_seed = 31;
  MultiSeries local = perturb_topk(x, w, 1.0, {PerturbStat::Gaussian, PerturbScope::Local}, st,
                                   cell_seed);
  MultiSeries global = perturb_topk(x, w, 1.0, {PerturbStat::Gaussian, PerturbScope::Global}, st,
                                    cell_seed);
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 4; ++t) {
      double z_local = (local.at(c, t) - st.local_mean(c, t)) / st.local_std(c, t);
      double z_global =
          (global.at(c, t) - st.global_mean[static_cast<size_t>(c)]) / st.global_std[static_cast<size_t>(c)];
      CHECK(z_local == doctest::Approx(z_global).epsilon(1e-9));
    }

  // the two most salient cells get the same draw at a smaller fraction
  MultiSeries partial = perturb_topk(x, w, 0.25, {PerturbStat::Gaussian, PerturbScope::Local}, st,
                                     cell_seed);
  CHECK(partial.at(0, 0) == local.at(0, 0));
  CHECK(partial.at(1, 3) == local.at(1, 3));

  // and a different protocol seed moves them
  MultiSeries other = perturb_topk(x, w, 1.0, {PerturbStat::Gaussian, PerturbScope::Local}, st,
                                   cell_seed + 1);
  CHECK(other.at(0, 0) != local.at(0, 0));
}

TEST_CASE("perturbation rejects bad inputs") {
  Matrix xv(1, 4, 0.0);
  MultiSeries x(xv);
  Matrix a(1, 4, 1.0), b(1, 4, -1.0);
  DatasetStats st = dataset_stats(LabeledDataset({MultiSeries(a), MultiSeries(b)}, {0, 1}, 2));
  Matrix raw(1, 4, 1.0);
  CHECK_THROWS_AS(perturb_topk(x, SaliencyMap(raw, Scale::Raw), 0.5,
                               {PerturbStat::Mean, PerturbScope::Local}, st, 0),
                  NotRescaled);
  Matrix wrong(1, 3, 0.0);
  wrong(0, 0) = 100.0;
  CHECK_THROWS_AS(perturb_topk(x, SaliencyMap(wrong, Scale::Rescaled0to100), 0.5,
                               {PerturbStat::Mean, PerturbScope::Local}, st, 0),
                  ShapeMismatch);
  Matrix ok(1, 4, 0.0);
  ok(0, 0) = 100.0;
  CHECK_THROWS_AS(perturb_topk(x, SaliencyMap(ok, Scale::Rescaled0to100), 1.5,
                               {PerturbStat::Mean, PerturbScope::Local}, st, 0),
                  DomainError);
}

TEST_CASE("drop curves fall as the referee's evidence is erased") {
  // instances classified by cell (0,0); explanations point straight at it
  int n = 8;
  std::vector<MultiSeries> inst;
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    Matrix v(1, 5, 0.0);
    v(0, 0) = i % 2 == 0 ? -3.0 : 3.0;
    inst.push_back(MultiSeries(v));
    labels.push_back(i % 2);
  }
  LabeledDataset test(inst, labels, 2);
  DatasetStats st = dataset_stats(test);  // local mean of cell (0,0) is 0

  std::vector<SaliencyMap> maps;
  Matrix w(1, 5, 0.0);
  w(0, 0) = 100.0;
  for (int i = 0; i < n; ++i) maps.push_back(SaliencyMap(w, Scale::Rescaled0to100));

  CellSignReferee referee;
  AccuracyDropCurve c = drop_curve(referee, test, maps, {PerturbStat::Mean, PerturbScope::Local},
                                   {0.0, 0.2, 1.0}, st, 5);
  REQUIRE(c.accuracies.size() == 3);
  CHECK(c.accuracies[0] == 1.0);   // untouched: the rule is perfect
  CHECK(c.accuracies[1] == 0.5);   // cell (0,0) wiped to 0 -> referee guesses class 0
  CHECK(c.accuracies[2] == 0.5);
  CHECK(curve_auc(c) < 1.0);

  // an explanation pointing elsewhere leaves the referee alone until the end
  Matrix w2(1, 5, 0.0);
  w2(0, 4) = 100.0;
  std::vector<SaliencyMap> decoy(static_cast<size_t>(n), SaliencyMap(w2, Scale::Rescaled0to100));
  AccuracyDropCurve c2 = drop_curve(referee, test, decoy, {PerturbStat::Mean, PerturbScope::Local},
                                    {0.0, 0.2, 1.0}, st, 5);
  CHECK(c2.accuracies[1] == 1.0);
  CHECK(curve_auc(c2) > curve_auc(c));

  CHECK_THROWS_AS(drop_curve(referee, test, {maps[0]}, {PerturbStat::Mean, PerturbScope::Local},
                             {0.0, 1.0}, st, 5),
                  ShapeMismatch);
}

TEST_CASE("curve_auc is the normalized trapezoid area") {
  AccuracyDropCurve c;
  c.fractions = {0.0, 0.5, 1.0};
  c.accuracies = {1.0, 0.5, 0.0};
  CHECK(curve_auc(c) == doctest::Approx(0.5));
  // refining a piecewise-linear curve cannot change its area
  AccuracyDropCurve fine;
  fine.fractions = {0.0, 0.25, 0.5, 0.75, 1.0};
  fine.accuracies = {1.0, 0.75, 0.5, 0.25, 0.0};
  CHECK(curve_auc(fine) == doctest::Approx(curve_auc(c)));
  // span-normalized: a [0, 0.5] curve divides by 0.5
  AccuracyDropCurve half;
  half.fractions = {0.0, 0.5};
  half.accuracies = {1.0, 1.0};
  CHECK(curve_auc(half) == doctest::Approx(1.0));

  AccuracyDropCurve bad;
  bad.fractions = {0.5, 0.5};
  bad.accuracies = {1.0, 1.0};
  CHECK_THROWS_AS(curve_auc(bad), DomainError);
  AccuracyDropCurve single;
  single.fractions = {0.0};
  single.accuracies = {1.0};
  CHECK_THROWS_AS(curve_auc(single), DomainError);
}

TEST_CASE("aggregation scales, powers and ranks the published example") {
  std::vector<AucRecord> recs;
  const char* names[] = {"a", "b", "c", "d", "e"};
  double aucs[] = {0.29, 0.30, 0.45, 0.53, 0.55};
  for (int i = 0; i < 5; ++i)
    recs.push_back({names[i], "referee", {PerturbStat::Mean, PerturbScope::Local}, aucs[i]});
  AmeeReport rep = aggregate_and_rank(recs);
  REQUIRE(rep.rows.size() == 5);
  CHECK(rep.rows[0].explainer == "a");
  CHECK(rep.rows[0].rank == 1);
  CHECK(rep.rows[0].power == 1.0);
  CHECK(rep.rows[4].explainer == "e");
  CHECK(rep.rows[4].power == 0.0);
  CHECK(rep.rows[2].explainer == "c");
  CHECK(rep.rows[2].rank == 3);
  CHECK(rep.rows[2].power == doctest::Approx(1.0 - (0.45 - 0.29) / 0.26).epsilon(1e-9));
  CHECK(rep.rows[2].power == doctest::Approx(0.3846).epsilon(1e-3));
}

TEST_CASE("aggregation averages across referees and strategies first") {
  std::vector<AucRecord> recs;
  recs.push_back({"x", "r1", {PerturbStat::Mean, PerturbScope::Local}, 0.2});
  recs.push_back({"x", "r2", {PerturbStat::Mean, PerturbScope::Local}, 0.4});
  recs.push_back({"y", "r1", {PerturbStat::Mean, PerturbScope::Local}, 0.8});
  recs.push_back({"y", "r2", {PerturbStat::Mean, PerturbScope::Local}, 1.0});
  AmeeReport rep = aggregate_and_rank(recs);
  CHECK(rep.rows[0].explainer == "x");
  CHECK(rep.rows[0].avg_auc == doctest::Approx(0.3));
  CHECK(rep.rows[1].avg_auc == doctest::Approx(0.9));
  CHECK(rep.rows[0].power == 1.0);
  CHECK(rep.rows[1].power == 0.0);

  // affine shifts of every auc change nothing
  for (auto& r : recs) r.auc = 0.1 + 0.5 * r.auc;
  AmeeReport shifted = aggregate_and_rank(recs);
  for (size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(shifted.rows[i].explainer == rep.rows[i].explainer);
    CHECK(shifted.rows[i].power == doctest::Approx(rep.rows[i].power).epsilon(1e-9));
    CHECK(shifted.rows[i].rank == rep.rows[i].rank);
  }

  CHECK_THROWS_AS(aggregate_and_rank({recs[0], recs[1]}), DomainError);  // one explainer
  std::vector<AucRecord> flat = {{"x", "r", {}, 0.5}, {"y", "r", {}, 0.5}};
  CHECK_THROWS_AS(aggregate_and_rank(flat), DegenerateSpread);
}

TEST_CASE("the full protocol prefers the explanation that marks the box") {
  SynthSpec spec;
  spec.kind = SynthKind::Gaussian;
  spec.n_train = 24;
  spec.n_test = 24;
  spec.d = 4;
  spec.L = 20;
  spec.box_ch_lo = 0;
  spec.box_ch_hi = 2;
  spec.box_t_lo = 5;
  spec.box_t_hi = 10;
  spec.offset = 2.0;
  spec.seed = 3;
  auto [train, test] = generate_dataset(spec);

  // explainer 1: the ground-truth box as a map; explainer 2: uniform noise
  Matrix gt(4, 20, 0.0);
  for (int c = 0; c < 2; ++c)
    for (int t = 5; t < 10; ++t) gt(c, t) = 1.0;
  NamedExplanations truth{"truth", std::vector<SaliencyMap>(
                                       static_cast<size_t>(test.size()),
                                       SaliencyMap(gt, Scale::Raw))};
  NamedExplanations noise{"noise", {}};
  Rng rng(4);
  for (int i = 0; i < test.size(); ++i) {
    Matrix w(4, 20);
    for (int c = 0; c < 4; ++c)
      for (int t = 0; t < 20; ++t) w(c, t) = rng.uniform();
    noise.maps.push_back(SaliencyMap(w, Scale::Raw));
  }

  AmeeConfig cfg;
  cfg.referee_kernels = 60;
  cfg.seed = 5;
  cfg.fractions = {0.0, 0.25, 0.5, 1.0};
  AmeeResult res = run_amee(train, test, {truth, noise}, cfg);

  REQUIRE(res.report.rows.size() == 2);
  CHECK(res.report.rows[0].explainer == "truth");
  CHECK(res.report.rows[0].power == 1.0);
  CHECK(res.report.rows[1].explainer == "noise");
  CHECK(res.report.rows[1].power == 0.0);
  // the signal is strong enough that no referee falls to the majority baseline
  CHECK(res.report.referee_clean.size() == 3);
  CHECK(res.report.excluded_referees.empty());

  // curve bookkeeping: one curve per explainer x strategy x referee
  CHECK(res.curves.size() == 2 * 4 * 3);

  // deterministic end to end
  AmeeResult res2 = run_amee(train, test, {truth, noise}, cfg);
  CHECK(format_amee_report(res2) == format_amee_report(res));
  CHECK(format_amee_curves(res2.curves) == format_amee_curves(res.curves));

  // the report text carries the header, referee lines and both rows
  std::string rep = format_amee_report(res);
  CHECK(rep.find("# amee report") == 0);
  CHECK(rep.find("explainer,average_auc,scaled_auc,explanation_power,rank") != std::string::npos);
  CHECK(rep.find("truth,") != std::string::npos);
  CHECK(rep.find("# excluded_referees,") != std::string::npos);
  std::string curves = format_amee_curves(res.curves);
  CHECK(curves.find("explainer,referee,strategy,fraction,accuracy") == 0);

  CHECK_THROWS_AS(run_amee(train, test, {truth}, cfg), DomainError);
  NamedExplanations dup = truth;
  CHECK_THROWS_AS(run_amee(train, test, {truth, dup}, cfg), DomainError);
  NamedExplanations shallow{"shallow", {truth.maps[0]}};
  CHECK_THROWS_AS(run_amee(train, test, {truth, shallow}, cfg), ShapeMismatch);
}
