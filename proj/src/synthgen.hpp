#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "rng.hpp"
#include "tsdata.hpp"

namespace tsxai {

// Base signal families for the synthetic benchmarks.
enum class SynthKind { PseudoPeriodic, Gaussian, AutoRegressive };

SynthKind parse_kind(const std::string& name);      // accepts pp / gaussian / ar and synonyms
std::string kind_name(SynthKind kind);              // canonical short name

// Two-class benchmark: independent base noise per instance, plus a constant
// offset added inside a known channel/time box -- +offset for class 1,
// -offset for class 0.  The box is the ground truth a saliency method should
// recover.
struct SynthSpec {
  SynthKind kind = SynthKind::PseudoPeriodic;
  int n_train = 100;
  int n_test = 100;
  int d = 20;
  int L = 100;
  int box_ch_lo = 0, box_ch_hi = 10;   // channel range [lo, hi)
  int box_t_lo = 10, box_t_hi = 20;    // time range [lo, hi)
  double offset = 1.0;
  double ar_phi = 0.9;                 // AR(1) coefficient
  uint64_t seed = 0;

  void validate() const;
};

// One base draw (no class signal).  Draw order per channel is fixed:
// pseudo-periodic takes two uniforms (frequency in [2,6], phase in [0,2pi))
// then one normal per step (noise sd 0.1); gaussian takes one normal per
// step; AR(1) takes one normal per step with x_t = phi*x_{t-1} + n_t.
// With phi = 0 the AR draw is bitwise identical to the gaussian one.
MultiSeries generate_base(const SynthSpec& spec, Rng& rng);

// Adds the class offset inside the box; label must be 0 or 1.
MultiSeries inject_box(const MultiSeries& base, const SynthSpec& spec, int label);

// Segment-resolution relevance mask for the box.  Box edges must land on
// segment boundaries, and L must divide evenly.
GroundTruthMask ground_truth_mask(const SynthSpec& spec, int segments_per_channel);

// Train and test splits.  Labels alternate 0,1,0,1,...; instance i of split
// s draws from the stream derive_seed(seed, {s, i}), so generation is
// order-independent and safe to parallelise.
std::pair<LabeledDataset, LabeledDataset> generate_dataset(const SynthSpec& spec);

}  // namespace tsxai
