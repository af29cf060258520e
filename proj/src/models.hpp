#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "classifier.hpp"
#include "linear.hpp"
#include "rocket.hpp"
#include "tsdata.hpp"

namespace tsxai {

// Column-wise zero-mean unit-variance scaling (sample std, n-1).  Constant
// columns are centered only.
struct Standardizer {
  std::vector<double> mean, scale;
  void fit(const Matrix& x);
  void apply(Matrix& x) const;
  void apply(std::vector<double>& row) const;
};

// Random-kernel features -> standardize -> multinomial logistic.  The
// kernel bank is regenerated from its stored seed on load, so the sidecar
// only carries the linear part.
class RocketLogisticModel : public ProbClassifier {
 public:
  struct Config {
    int n_kernels = 2000;
    uint64_t seed = 0;
    int max_iter = 1000;
    double l2 = 1e-4;
    double lr = 0.0;  // <= 0: use stable_gd_lr on the standardized features
  };

  static RocketLogisticModel train(const LabeledDataset& ds, const Config& cfg);
  std::vector<double> predict_proba(const MultiSeries& x) const override;
  int n_classes() const override { return logit_.n_classes(); }

  const RocketFeatures& features() const { return rocket_; }
  const LogisticModel& logistic() const { return logit_; }

  void save(const std::filesystem::path& path) const;
  static RocketLogisticModel load(const std::filesystem::path& path);

  // Field-level (de)serialization so ensembles can nest members in one file.
  void pack(class ModelFile& mf, const std::string& prefix) const;
  static RocketLogisticModel unpack(const class ModelFile& mf, const std::string& prefix);

 private:
  RocketFeatures rocket_;
  Standardizer std_;
  LogisticModel logit_;
};

// Random-kernel features -> standardize -> CV ridge.  Probabilities are the
// softmax of the ridge scores (enough for accuracy-style uses).
class RocketRidgeModel : public ProbClassifier {
 public:
  static RocketRidgeModel train(const LabeledDataset& ds, int n_kernels, uint64_t seed);
  std::vector<double> predict_proba(const MultiSeries& x) const override;
  int n_classes() const override { return ridge_.n_classes(); }

  void save(const std::filesystem::path& path) const;
  static RocketRidgeModel load(const std::filesystem::path& path);

 private:
  RocketFeatures rocket_;
  Standardizer std_;
  RidgeModel ridge_;
};

// CV ridge straight on the flattened raw values.  Its weight vector doubles
// as a saliency map: explain(class) unflattens the class row.
class RidgeConcatModel : public ProbClassifier {
 public:
  static RidgeConcatModel train(const LabeledDataset& ds);
  std::vector<double> predict_proba(const MultiSeries& x) const override;
  int n_classes() const override { return ridge_.n_classes(); }

  SaliencyMap explain(int cls) const;
  const RidgeModel& ridge() const { return ridge_; }
  int channels() const { return d_; }
  int length() const { return L_; }

  void save(const std::filesystem::path& path) const;
  static RidgeConcatModel load(const std::filesystem::path& path);

 private:
  RidgeModel ridge_;
  int d_ = 0, L_ = 0;
};

// One rocket+logistic model per channel; probabilities are averaged.  Used
// for channel-by-channel attribution, where each member is also queried on
// its own channel slice.
class ChannelEnsemble : public ProbClassifier {
 public:
  static ChannelEnsemble train(const LabeledDataset& ds, const RocketLogisticModel::Config& cfg);
  std::vector<double> predict_proba(const MultiSeries& x) const override;
  int n_classes() const override { return members_.front().n_classes(); }

  int channels() const { return static_cast<int>(members_.size()); }
  const RocketLogisticModel& member(int c) const { return members_.at(static_cast<size_t>(c)); }

  void save(const std::filesystem::path& path) const;
  static ChannelEnsemble load(const std::filesystem::path& path);

 private:
  std::vector<RocketLogisticModel> members_;
};

// Single-channel view of a dataset (copies channel c of every instance).
LabeledDataset channel_dataset(const LabeledDataset& ds, int c);
// Single-channel series extraction.
MultiSeries channel_slice(const MultiSeries& x, int c);

}  // namespace tsxai
