#include "explain.hpp"

#include "error.hpp"
#include "rng.hpp"
#include "shap.hpp"

namespace tsxai {

std::string method_name(ExplainMethod m) {
  switch (m) {
    case ExplainMethod::Ridge:
      return "ridge";
    case ExplainMethod::ShapConcat:
      return "shap";
    case ExplainMethod::ShapChannel:
      return "shap-chbych";
    case ExplainMethod::Dcam:
      return "dcam";
    case ExplainMethod::Random:
      return "random";
  }
  throw DomainError("unknown method enum value");
}

ExplainMethod parse_method(const std::string& name) {
  for (ExplainMethod m : {ExplainMethod::Ridge, ExplainMethod::ShapConcat,
                          ExplainMethod::ShapChannel, ExplainMethod::Dcam, ExplainMethod::Random})
    if (method_name(m) == name) return m;
  throw DomainError("unknown method '" + name +
                    "' (want ridge, shap, shap-chbych, dcam or random)");
}

std::vector<SaliencyMap> explain_ridge(const RidgeConcatModel& m, const LabeledDataset& test) {
  std::vector<SaliencyMap> out;
  out.reserve(static_cast<size_t>(test.size()));
  for (int i = 0; i < test.size(); ++i) out.push_back(m.explain(m.predict(test.instance(i))));
  return out;
}

std::vector<SaliencyMap> explain_shap_concat(const RocketLogisticModel& m,
                                             const LabeledDataset& train,
                                             const LabeledDataset& test, const ExplainParams& p) {
  int d = test.channels(), L = test.length();
  if (m.features().d != 1 || m.features().L != d * L)
    throw ShapeMismatch("model expects " + std::to_string(m.features().d) + "x" +
                        std::to_string(m.features().L) +
                        " input; train it on the concatenated form of this data");
  LabeledDataset ctrain = concat_channels(train);
  Matrix bgm = training_mean(ctrain);
  std::vector<double> bg(bgm.row(0), bgm.row(0) + bgm.cols());

  std::vector<SaliencyMap> out;
  out.reserve(static_cast<size_t>(test.size()));
  for (int i = 0; i < test.size(); ++i)
    out.push_back(explain_concatenated(m, test.instance(i), bg, p.segments, p.n_samples,
                                       derive_seed(p.seed, {static_cast<uint64_t>(i)})));
  return out;
}

std::vector<SaliencyMap> explain_shap_channels(const ChannelEnsemble& m,
                                               const LabeledDataset& train,
                                               const LabeledDataset& test,
                                               const ExplainParams& p) {
  Matrix bg = training_mean(train);
  std::vector<SaliencyMap> out;
  out.reserve(static_cast<size_t>(test.size()));
  for (int i = 0; i < test.size(); ++i)
    out.push_back(explain_channel_by_channel(m, test.instance(i), bg, p.segments, p.n_samples,
                                             derive_seed(p.seed, {static_cast<uint64_t>(i)})));
  return out;
}

std::vector<SaliencyMap> explain_dcam(const GapCnnModel& m, const LabeledDataset& test,
                                      const ExplainParams& p) {
  std::vector<SaliencyMap> out;
  out.reserve(static_cast<size_t>(test.size()));
  for (int i = 0; i < test.size(); ++i)
    out.push_back(
        m.dcam(test.instance(i), p.k_perms, derive_seed(p.seed, {static_cast<uint64_t>(i)})));
  return out;
}

std::vector<SaliencyMap> random_maps(int n, int d, int segments, uint64_t seed) {
  if (n < 1 || d < 1 || segments < 1) throw DomainError("need positive map counts and shape");
  std::vector<SaliencyMap> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(i)}));
    Matrix w(d, segments);
    for (int c = 0; c < d; ++c)
      for (int s = 0; s < segments; ++s) w(c, s) = rng.uniform();
    out.emplace_back(std::move(w), Scale::Raw);
  }
  return out;
}

std::vector<SaliencyMap> align_to_segments(const std::vector<SaliencyMap>& maps, int segments) {
  if (segments < 1) throw DomainError("need a positive segment count");
  std::vector<SaliencyMap> out;
  out.reserve(maps.size());
  for (const auto& m : maps) {
    if (m.segments() % segments != 0)
      throw NonDivisibleWindow("cannot pool " + std::to_string(m.segments()) + " columns to " +
                               std::to_string(segments));
    int window = m.segments() / segments;
    out.push_back(rescale_abs_minmax(window == 1 ? m : pool_saliency(m, window)));
  }
  return out;
}

}  // namespace tsxai
