#include "tsdata.hpp"

#include <cmath>

#include "error.hpp"

namespace tsxai {

MultiSeries::MultiSeries(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw ShapeMismatch("series needs at least one channel and one time step, got " +
                        std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
  if (!values_.all_finite()) throw NonFinite("series contains non-finite values");
}

LabeledDataset::LabeledDataset(std::vector<MultiSeries> instances, std::vector<int> labels,
                               int n_classes, uint64_t seed, std::string name)
    : instances_(std::move(instances)),
      labels_(std::move(labels)),
      n_classes_(n_classes),
      seed_(seed),
      name_(std::move(name)) {
  if (instances_.empty()) throw DimensionMismatch("dataset has no instances");
  if (labels_.size() != instances_.size())
    throw DimensionMismatch("dataset has " + std::to_string(instances_.size()) +
                            " instances but " + std::to_string(labels_.size()) + " labels");
  if (n_classes_ < 2) throw DimensionMismatch("dataset needs at least 2 classes");
  int d = instances_.front().channels();
  int L = instances_.front().length();
  for (const auto& inst : instances_)
    if (inst.channels() != d || inst.length() != L)
      throw DimensionMismatch("instances disagree on shape: expected " + std::to_string(d) + "x" +
                              std::to_string(L) + ", found " + std::to_string(inst.channels()) +
                              "x" + std::to_string(inst.length()));
  for (int lbl : labels_)
    if (lbl < 0 || lbl >= n_classes_)
      throw DimensionMismatch("label " + std::to_string(lbl) + " outside [0," +
                              std::to_string(n_classes_) + ")");
}

SaliencyMap::SaliencyMap(Matrix weights, Scale scale, int segment_width)
    : weights_(std::move(weights)), scale_(scale), segment_width_(segment_width) {
  if (weights_.rows() < 1 || weights_.cols() < 1)
    throw ShapeMismatch("saliency map must be non-empty");
  if (segment_width_ < 1) throw ShapeMismatch("segment width must be positive");
  if (!weights_.all_finite()) throw NonFinite("saliency map contains non-finite values");
  if (scale_ == Scale::Rescaled0to100) {
    double lo = weights_.min(), hi = weights_.max();
    if (lo < 0.0 || hi > 100.0)
      throw NotRescaled("rescaled map has values outside [0,100]");
    bool constant_zero = lo == 0.0 && hi == 0.0;
    if (!constant_zero && (lo != 0.0 || hi != 100.0))
      throw NotRescaled("rescaled map must span exactly [0,100] (or be all zero)");
  }
}

GroundTruthMask::GroundTruthMask(Matrix zero_one) : mask_(std::move(zero_one)) {
  if (mask_.rows() < 1 || mask_.cols() < 1) throw ShapeMismatch("mask must be non-empty");
  bool any_one = false, any_zero = false;
  for (int c = 0; c < mask_.rows(); ++c)
    for (int s = 0; s < mask_.cols(); ++s) {
      double v = mask_(c, s);
      if (v == 0.0)
        any_zero = true;
      else if (v == 1.0)
        any_one = true;
      else
        throw DegenerateMask("mask entries must be 0 or 1, found " + std::to_string(v));
    }
  if (!any_one) throw DegenerateMask("mask marks nothing relevant");
  if (!any_zero) throw DegenerateMask("mask marks everything relevant");
}

MultiSeries concat_channels(const MultiSeries& x) {
  int d = x.channels(), L = x.length();
  Matrix flat(1, d * L);
  for (int c = 0; c < d; ++c)
    for (int t = 0; t < L; ++t) flat(0, c * L + t) = x.at(c, t);
  return MultiSeries(std::move(flat));
}

LabeledDataset concat_channels(const LabeledDataset& ds) {
  std::vector<MultiSeries> flat;
  flat.reserve(static_cast<size_t>(ds.size()));
  for (int i = 0; i < ds.size(); ++i) flat.push_back(concat_channels(ds.instance(i)));
  return LabeledDataset(std::move(flat), ds.labels(), ds.n_classes(), ds.seed(),
                        ds.name() + "-concat");
}

SaliencyMap pool_saliency(const SaliencyMap& w, int window) {
  if (window < 1) throw NonDivisibleWindow("pool window must be positive");
  int S = w.segments();
  if (S % window != 0)
    throw NonDivisibleWindow("cannot pool " + std::to_string(S) + " segments by window " +
                             std::to_string(window));
  int out_s = S / window;
  Matrix pooled(w.channels(), out_s);
  for (int c = 0; c < w.channels(); ++c)
    for (int s = 0; s < out_s; ++s) {
      double acc = 0.0;
      for (int k = 0; k < window; ++k) acc += w.at(c, s * window + k);
      pooled(c, s) = acc / window;
    }
  return SaliencyMap(std::move(pooled), w.scale(), w.segment_width() * window);
}

SaliencyMap rescale_abs_minmax(const SaliencyMap& w) {
  Matrix out(w.channels(), w.segments());
  double lo = std::abs(w.at(0, 0)), hi = lo;
  for (int c = 0; c < w.channels(); ++c)
    for (int s = 0; s < w.segments(); ++s) {
      double v = std::abs(w.at(c, s));
      out(c, s) = v;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  double span = hi - lo;
  for (int c = 0; c < out.rows(); ++c)
    for (int s = 0; s < out.cols(); ++s)
      out(c, s) = span == 0.0 ? 0.0 : (out(c, s) - lo) / span * 100.0;
  return SaliencyMap(std::move(out), Scale::Rescaled0to100, w.segment_width());
}

SaliencyMap unflatten_saliency(const SaliencyMap& flat, int channels, int per_channel) {
  if (flat.channels() != 1)
    throw ShapeMismatch("unflatten expects a single-row map, got " +
                        std::to_string(flat.channels()) + " rows");
  if (channels < 1 || per_channel < 1 || flat.segments() != channels * per_channel)
    throw ShapeMismatch("cannot unflatten " + std::to_string(flat.segments()) + " segments into " +
                        std::to_string(channels) + "x" + std::to_string(per_channel));
  Matrix out(channels, per_channel);
  for (int c = 0; c < channels; ++c)
    for (int s = 0; s < per_channel; ++s) out(c, s) = flat.at(0, c * per_channel + s);
  return SaliencyMap(std::move(out), flat.scale(), flat.segment_width());
}

}  // namespace tsxai
