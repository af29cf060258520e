#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "explain.hpp"
#include "gapcnn.hpp"
#include "models.hpp"
#include "synthgen.hpp"
#include "tsdata.hpp"

using namespace tsxai;
namespace fs = std::filesystem;

namespace {

// tiny but separable: a 2.5-offset box on channel 0, steps 2..5
std::pair<LabeledDataset, LabeledDataset> tiny_benchmark() {
  SynthSpec spec;
  spec.kind = SynthKind::Gaussian;
  spec.n_train = 12;
  spec.n_test = 6;
  spec.d = 2;
  spec.L = 8;
  spec.box_ch_lo = 0;
  spec.box_ch_hi = 1;
  spec.box_t_lo = 2;
  spec.box_t_hi = 6;
  spec.offset = 2.5;
  spec.seed = 21;
  return generate_dataset(spec);
}

fs::path scratch() {
  fs::path p = fs::temp_directory_path() / "tsxai_explain_tests";
  fs::create_directories(p);
  return p;
}

bool same_weights(const SaliencyMap& a, const SaliencyMap& b) {
  return a.scale() == b.scale() && a.weights() == b.weights();
}

}  // namespace

TEST_CASE("method names round-trip and reject junk") {
  for (ExplainMethod m : {ExplainMethod::Ridge, ExplainMethod::ShapConcat,
                          ExplainMethod::ShapChannel, ExplainMethod::Dcam, ExplainMethod::Random})
    CHECK(parse_method(method_name(m)) == m);
  CHECK(method_name(ExplainMethod::ShapConcat) == "shap");
  CHECK(method_name(ExplainMethod::ShapChannel) == "shap-chbych");
  CHECK_THROWS_AS(parse_method("lime"), DomainError);
}

TEST_CASE("random maps are uniform, replayable and per-index stable") {
  auto maps = random_maps(5, 3, 7, 42);
  REQUIRE(maps.size() == 5);
  for (const auto& m : maps) {
    CHECK(m.channels() == 3);
    CHECK(m.segments() == 7);
    CHECK(m.scale() == Scale::Raw);
    for (int c = 0; c < 3; ++c)
      for (int s = 0; s < 7; ++s) {
        CHECK(m.at(c, s) >= 0.0);
        CHECK(m.at(c, s) < 1.0);
      }
  }
  auto again = random_maps(5, 3, 7, 42);
  for (size_t i = 0; i < maps.size(); ++i) CHECK(same_weights(maps[i], again[i]));

  // map i depends only on (seed, i): a shorter batch is a prefix
  auto prefix = random_maps(2, 3, 7, 42);
  CHECK(same_weights(prefix[0], maps[0]));
  CHECK(same_weights(prefix[1], maps[1]));

  CHECK_FALSE(same_weights(random_maps(1, 3, 7, 43)[0], maps[0]));
  CHECK_THROWS_AS(random_maps(0, 3, 7, 0), DomainError);
  CHECK_THROWS_AS(random_maps(1, 0, 7, 0), DomainError);
}

TEST_CASE("alignment pools and rescales; window one only rescales") {
  Matrix w(2, 8);
  for (int c = 0; c < 2; ++c)
    for (int s = 0; s < 8; ++s) w(c, s) = (c + 1) * (s - 3.0);
  SaliencyMap raw(w, Scale::Raw);

  auto aligned = align_to_segments({raw, raw}, 4);
  REQUIRE(aligned.size() == 2);
  CHECK(aligned[0].segments() == 4);
  CHECK(aligned[0].scale() == Scale::Rescaled0to100);
  SaliencyMap oracle = rescale_abs_minmax(pool_saliency(raw, 2));
  CHECK(same_weights(aligned[0], oracle));
  CHECK(same_weights(aligned[1], oracle));

  auto same_res = align_to_segments({raw}, 8);
  CHECK(same_weights(same_res[0], rescale_abs_minmax(raw)));

  CHECK_THROWS_AS(align_to_segments({raw}, 3), NonDivisibleWindow);
  CHECK_THROWS_AS(align_to_segments({raw}, 0), DomainError);
}

TEST_CASE("ridge explanations are the class row of the trained weights") {
  auto [train, test] = tiny_benchmark();
  RidgeConcatModel m = RidgeConcatModel::train(train);
  auto maps = explain_ridge(m, test);
  REQUIRE(static_cast<int>(maps.size()) == test.size());
  for (int i = 0; i < test.size(); ++i) {
    CHECK(maps[static_cast<size_t>(i)].channels() == 2);
    CHECK(maps[static_cast<size_t>(i)].segments() == 8);
    CHECK(maps[static_cast<size_t>(i)].scale() == Scale::Raw);
    SaliencyMap direct = m.explain(m.predict(test.instance(i)));
    CHECK(same_weights(maps[static_cast<size_t>(i)], direct));
  }
}

TEST_CASE("concatenated shap wants the concat-trained model") {
  auto [train, test] = tiny_benchmark();
  RocketLogisticModel::Config cfg;
  cfg.n_kernels = 25;
  cfg.seed = 3;
  cfg.max_iter = 120;

  RocketLogisticModel wrong = RocketLogisticModel::train(train, cfg);
  ExplainParams p;
  p.segments = 4;
  p.n_samples = 64;
  p.seed = 9;
  CHECK_THROWS_WITH_AS(static_cast<void>(explain_shap_concat(wrong, train, test, p)),
                       doctest::Contains("train it on the concatenated form"), ShapeMismatch);

  RocketLogisticModel m = RocketLogisticModel::train(concat_channels(train), cfg);
  auto maps = explain_shap_concat(m, train, test, p);
  REQUIRE(static_cast<int>(maps.size()) == test.size());
  for (const auto& w : maps) {
    CHECK(w.channels() == 2);
    CHECK(w.segments() == 4);
    CHECK(w.scale() == Scale::Raw);
  }
  auto again = explain_shap_concat(m, train, test, p);
  for (size_t i = 0; i < maps.size(); ++i) CHECK(same_weights(maps[i], again[i]));

  // the per-instance seed stream shows up as different maps per instance
  CHECK_FALSE(same_weights(maps[0], maps[1]));
}

TEST_CASE("channel-by-channel shap stacks one game per channel") {
  auto [train, test] = tiny_benchmark();
  RocketLogisticModel::Config cfg;
  cfg.n_kernels = 20;
  cfg.seed = 5;
  cfg.max_iter = 80;
  ChannelEnsemble e = ChannelEnsemble::train(train, cfg);
  CHECK(e.channels() == 2);

  ExplainParams p;
  p.segments = 4;
  p.n_samples = 0;  // M=4 per game: exhaustive
  p.seed = 11;
  auto maps = explain_shap_channels(e, train, test, p);
  REQUIRE(static_cast<int>(maps.size()) == test.size());
  for (const auto& w : maps) {
    CHECK(w.channels() == 2);
    CHECK(w.segments() == 4);
    CHECK(w.scale() == Scale::Raw);
  }
  auto again = explain_shap_channels(e, train, test, p);
  for (size_t i = 0; i < maps.size(); ++i) CHECK(same_weights(maps[i], again[i]));
}

TEST_CASE("dcam driver explains every instance at full resolution") {
  auto [train, test] = tiny_benchmark();
  GapCnnConfig cfg;
  cfg.filters1 = 4;
  cfg.filters2 = 6;
  cfg.epochs = 12;
  cfg.patience = 12;
  cfg.batch = 4;
  cfg.lr = 1e-3;
  cfg.seed = 17;
  GapCnnModel m = GapCnnModel::train(train, cfg);

  ExplainParams p;
  p.k_perms = 4;
  p.seed = 23;
  auto maps = explain_dcam(m, test, p);
  REQUIRE(static_cast<int>(maps.size()) == test.size());
  for (const auto& w : maps) {
    CHECK(w.channels() == 2);
    CHECK(w.segments() == 8);
    CHECK(w.scale() == Scale::Raw);
  }
  auto again = explain_dcam(m, test, p);
  for (size_t i = 0; i < maps.size(); ++i) CHECK(same_weights(maps[i], again[i]));
}

TEST_CASE("models survive a save/load round trip bit for bit") {
  auto [train, test] = tiny_benchmark();
  fs::path dir = scratch();

  RocketLogisticModel::Config cfg;
  cfg.n_kernels = 15;
  cfg.seed = 7;
  cfg.max_iter = 60;

  RidgeConcatModel rc = RidgeConcatModel::train(train);
  rc.save(dir / "rc.tsx");
  RidgeConcatModel rc2 = RidgeConcatModel::load(dir / "rc.tsx");
  CHECK(rc2.channels() == rc.channels());
  CHECK(rc2.length() == rc.length());

  RocketLogisticModel rl = RocketLogisticModel::train(train, cfg);
  rl.save(dir / "rl.tsx");
  RocketLogisticModel rl2 = RocketLogisticModel::load(dir / "rl.tsx");

  RocketRidgeModel rr = RocketRidgeModel::train(train, 15, 7);
  rr.save(dir / "rr.tsx");
  RocketRidgeModel rr2 = RocketRidgeModel::load(dir / "rr.tsx");

  ChannelEnsemble ce = ChannelEnsemble::train(train, cfg);
  ce.save(dir / "ce.tsx");
  ChannelEnsemble ce2 = ChannelEnsemble::load(dir / "ce.tsx");

  for (int i = 0; i < test.size(); ++i) {
    const MultiSeries& x = test.instance(i);
    CHECK(rc2.predict_proba(x) == rc.predict_proba(x));
    CHECK(rl2.predict_proba(x) == rl.predict_proba(x));
    CHECK(rr2.predict_proba(x) == rr.predict_proba(x));
    CHECK(ce2.predict_proba(x) == ce.predict_proba(x));
  }

  // the ridge explanation also survives
  CHECK(same_weights(rc2.explain(1), rc.explain(1)));

  // loading a file of the wrong kind complains
  CHECK_THROWS(static_cast<void>(RocketRidgeModel::load(dir / "rc.tsx")));
}

TEST_CASE("channel views copy the right slice") {
  auto [train, test] = tiny_benchmark();
  LabeledDataset ch1 = channel_dataset(train, 1);
  CHECK(ch1.channels() == 1);
  CHECK(ch1.length() == train.length());
  CHECK(ch1.size() == train.size());
  for (int i = 0; i < train.size(); ++i) {
    CHECK(ch1.label(i) == train.label(i));
    for (int t = 0; t < train.length(); ++t)
      CHECK(ch1.instance(i).at(0, t) == train.instance(i).at(1, t));
  }
  MultiSeries s = channel_slice(test.instance(0), 0);
  CHECK(s.channels() == 1);
  for (int t = 0; t < test.length(); ++t) CHECK(s.at(0, t) == test.instance(0).at(0, t));
  CHECK_THROWS_AS(channel_dataset(train, 2), DomainError);
}
