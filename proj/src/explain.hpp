#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapcnn.hpp"
#include "models.hpp"
#include "tsdata.hpp"

namespace tsxai {

enum class ExplainMethod { Ridge, ShapConcat, ShapChannel, Dcam, Random };

std::string method_name(ExplainMethod m);
ExplainMethod parse_method(const std::string& name);

// Knobs shared by the per-dataset drivers; each method reads what it needs.
struct ExplainParams {
  int segments = 10;  // per-channel segments for the SHAP methods and random maps
  int n_samples = 0;  // SHAP evaluation budget; 0 picks min(2^M, 2048)
  int k_perms = 200;  // dCAM permutation draws
  uint64_t seed = 0;
};

// Each driver produces one raw map per test instance at the method's native
// resolution: d x L for ridge and dcam, d x segments for the others.  Every
// instance is explained for the model's predicted class on that instance.

std::vector<SaliencyMap> explain_ridge(const RidgeConcatModel& m, const LabeledDataset& test);

// m must have been trained on the channel-concatenated train split; the
// masking background is that split's per-time-point mean.
std::vector<SaliencyMap> explain_shap_concat(const RocketLogisticModel& m,
                                             const LabeledDataset& train,
                                             const LabeledDataset& test, const ExplainParams& p);

std::vector<SaliencyMap> explain_shap_channels(const ChannelEnsemble& m,
                                               const LabeledDataset& train,
                                               const LabeledDataset& test,
                                               const ExplainParams& p);

std::vector<SaliencyMap> explain_dcam(const GapCnnModel& m, const LabeledDataset& test,
                                      const ExplainParams& p);

// Uniform noise maps — the calibration baseline.
std::vector<SaliencyMap> random_maps(int n, int d, int segments, uint64_t seed);

// Pool every map down to `segments` columns (each column count must be a
// multiple) and rescale to [0,100]: the standard step before scoring against
// a segment-resolution mask.
std::vector<SaliencyMap> align_to_segments(const std::vector<SaliencyMap>& maps, int segments);

}  // namespace tsxai
