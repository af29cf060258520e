#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "classifier.hpp"
#include "models.hpp"
#include "tsdata.hpp"

namespace tsxai {

// Near-equal time segmentation: M+1 boundaries over [0, L], earlier segments
// absorb the remainder.
struct SegmentSpec {
  int M = 0;
  std::vector<int> boundaries;  // size M+1, strictly increasing, 0 .. L
};

SegmentSpec segment_bounds(int L, int M);

// Coalition value function: bitmask of kept segments -> model output.
// Called concurrently during evaluation, so it must be thread-safe.
using CoalitionFn = std::function<double(const std::vector<uint8_t>&)>;
// Full probability vector for a (masked) series; must be thread-safe.
using ProbFn = std::function<std::vector<double>(const MultiSeries&)>;

struct ShapExplanation {
  std::vector<double> phi;          // per-segment attribution
  double base_value = 0.0;          // value of the empty coalition
  double efficiency_residual = 0.0; // base + sum(phi) - value(full)
};

// Standard kernel-SHAP weight (M-1) / (C(M,z) * z * (M-z)); the empty and
// full coalitions are handled by equality constraints, never weighted.
double shapley_kernel_weight(int M, int z);

// Kept segments copy x, masked segments copy the background curve.
MultiSeries mask_instance(const MultiSeries& x, const std::vector<uint8_t>& coalition,
                          const std::vector<double>& background, const SegmentSpec& seg);

// Weighted least squares of coalition values against membership masks under
// kernel weights, with the efficiency constraint folded in by eliminating
// the last attribution.  Enumerates all 2^M coalitions when that fits the
// sample budget; otherwise draws subset/complement pairs with sizes
// distributed as the kernel mass and unit row weights (frequency carries
// the weighting).  Deterministic given seed.
ShapExplanation kernel_shap_game(const CoalitionFn& v, int M, int n_samples, uint64_t seed);

// Classic average-of-marginal-contributions over all 2^M subsets; the
// testing oracle for kernel_shap_game.  M must stay <= 12.
ShapExplanation exact_shap_game(const CoalitionFn& v, int M);

// Series-level wrappers: the game masks x against the background and reads
// class `cls` probability from `predict`.
ShapExplanation kernel_shap(const ProbFn& predict, const MultiSeries& x, int M, int n_samples,
                            const std::vector<double>& background, int cls, uint64_t seed);
ShapExplanation exact_shap(const ProbFn& predict, const MultiSeries& x, int M,
                           const std::vector<double>& background, int cls);

// Per-time-point mean of a dataset (d x L) -- the masking background.
Matrix training_mean(const LabeledDataset& ds);

// Default evaluation budget: min(2^M, 2048).
int default_shap_samples(int M);

// Attribution for a model trained on concatenated series: one game with
// M = d * per_channel_segments over concat_channels(x), explained for the
// model's predicted class, reshaped to d x per_channel_segments (Raw).
// background has length d*L (concatenated training mean).
SaliencyMap explain_concatenated(const ProbClassifier& model, const MultiSeries& x,
                                 const std::vector<double>& background, int per_channel_segments,
                                 int n_samples, uint64_t seed);

// Attribution via one game per channel against that channel's sub-model,
// all explained for the ensemble's predicted class; rows stacked (Raw).
// background is the d x L training mean.
SaliencyMap explain_channel_by_channel(const ChannelEnsemble& ensemble, const MultiSeries& x,
                                       const Matrix& background, int segments, int n_samples,
                                       uint64_t seed);

}  // namespace tsxai
