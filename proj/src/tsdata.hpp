#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace tsxai {

// One multivariate time series: channels x time, all values finite.
class MultiSeries {
 public:
  MultiSeries() = default;
  explicit MultiSeries(Matrix values);

  int channels() const { return values_.rows(); }
  int length() const { return values_.cols(); }
  double at(int c, int t) const { return values_.at(c, t); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

// Labeled collection of equally shaped series.  `seed` and `name` are
// provenance carried along for manifests; they do not affect computation.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(std::vector<MultiSeries> instances, std::vector<int> labels, int n_classes,
                 uint64_t seed = 0, std::string name = "");

  int size() const { return static_cast<int>(instances_.size()); }
  int channels() const { return instances_.front().channels(); }
  int length() const { return instances_.front().length(); }
  int n_classes() const { return n_classes_; }
  const MultiSeries& instance(int i) const { return instances_.at(static_cast<size_t>(i)); }
  int label(int i) const { return labels_.at(static_cast<size_t>(i)); }
  const std::vector<int>& labels() const { return labels_; }
  uint64_t seed() const { return seed_; }
  const std::string& name() const { return name_; }

 private:
  std::vector<MultiSeries> instances_;
  std::vector<int> labels_;
  int n_classes_ = 0;
  uint64_t seed_ = 0;
  std::string name_;
};

enum class Scale { Raw, Rescaled0to100 };

// Saliency weights, one row per channel, one column per time segment.
// segment_width records how many raw time steps one column spans (1 until
// pooled).  Raw maps hold arbitrary finite values; rescaled maps hold
// [0,100] with min 0 and max 100 unless the map is constant zero.
class SaliencyMap {
 public:
  SaliencyMap() = default;
  SaliencyMap(Matrix weights, Scale scale, int segment_width = 1);

  int channels() const { return weights_.rows(); }
  int segments() const { return weights_.cols(); }
  int segment_width() const { return segment_width_; }
  Scale scale() const { return scale_; }
  double at(int c, int s) const { return weights_.at(c, s); }
  const Matrix& weights() const { return weights_; }

 private:
  Matrix weights_;
  Scale scale_ = Scale::Raw;
  int segment_width_ = 1;
};

// Binary relevance mask at segment resolution; must mix both values,
// otherwise precision/recall against it is meaningless.
class GroundTruthMask {
 public:
  GroundTruthMask() = default;
  explicit GroundTruthMask(Matrix zero_one);

  int channels() const { return mask_.rows(); }
  int segments() const { return mask_.cols(); }
  bool relevant(int c, int s) const { return mask_.at(c, s) != 0.0; }
  const Matrix& values() const { return mask_; }

 private:
  Matrix mask_;
};

// Row-major flattening: channel 0's values first, then channel 1, ...
MultiSeries concat_channels(const MultiSeries& x);
// Same, applied to every instance; labels and class count carry over.
LabeledDataset concat_channels(const LabeledDataset& ds);

// Mean over non-overlapping windows along time.  Segment count must divide
// evenly; scale and (scaled) segment width carry through.
SaliencyMap pool_saliency(const SaliencyMap& w, int window);

// |w| then min-max to [0,100].  A constant map becomes all zeros.
SaliencyMap rescale_abs_minmax(const SaliencyMap& w);

// Inverse of concat ordering: 1 x (channels*per_channel) -> channels x per_channel.
SaliencyMap unflatten_saliency(const SaliencyMap& flat, int channels, int per_channel);

}  // namespace tsxai
