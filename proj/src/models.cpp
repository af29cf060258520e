#include "models.hpp"

#include <cmath>

#include "error.hpp"
#include "modelio.hpp"
#include "rng.hpp"

namespace tsxai {

void Standardizer::fit(const Matrix& x) {
  int n = x.rows(), p = x.cols();
  if (n < 2) throw DimensionMismatch("standardizer needs at least 2 rows");
  mean.assign(static_cast<size_t>(p), 0.0);
  scale.assign(static_cast<size_t>(p), 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = x.row(i);
    for (int j = 0; j < p; ++j) mean[static_cast<size_t>(j)] += row[j];
  }
  for (double& m : mean) m /= n;
  for (int i = 0; i < n; ++i) {
    const double* row = x.row(i);
    for (int j = 0; j < p; ++j) {
      double dlt = row[j] - mean[static_cast<size_t>(j)];
      scale[static_cast<size_t>(j)] += dlt * dlt;
    }
  }
  for (double& s : scale) {
    s = std::sqrt(s / (n - 1));
    if (s == 0.0) s = 1.0;  // constant column: center only
  }
}

void Standardizer::apply(Matrix& x) const {
  if (static_cast<size_t>(x.cols()) != mean.size())
    throw ShapeMismatch("standardizer fitted for a different feature count");
  for (int i = 0; i < x.rows(); ++i) {
    double* row = x.row(i);
    for (int j = 0; j < x.cols(); ++j)
      row[j] = (row[j] - mean[static_cast<size_t>(j)]) / scale[static_cast<size_t>(j)];
  }
}

void Standardizer::apply(std::vector<double>& row) const {
  if (row.size() != mean.size())
    throw ShapeMismatch("standardizer fitted for a different feature count");
  for (size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean[j]) / scale[j];
}

// --- rocket + logistic --------------------------------------------------------

RocketLogisticModel RocketLogisticModel::train(const LabeledDataset& ds, const Config& cfg) {
  RocketLogisticModel m;
  m.rocket_ = sample_kernels(ds.channels(), ds.length(), cfg.n_kernels, cfg.seed);
  Matrix x = rocket_transform(m.rocket_, ds);
  m.std_.fit(x);
  m.std_.apply(x);
  LogisticConfig lc;
  lc.max_iter = cfg.max_iter;
  lc.l2 = cfg.l2;
  lc.lr = cfg.lr > 0.0 ? cfg.lr : stable_gd_lr(x, cfg.l2);
  m.logit_ = logistic_fit(x, ds.labels(), ds.n_classes(), lc);
  return m;
}

std::vector<double> RocketLogisticModel::predict_proba(const MultiSeries& x) const {
  std::vector<double> f = rocket_transform_one(rocket_, x);
  std_.apply(f);
  return logistic_proba(logit_, f.data(), static_cast<int>(f.size()));
}

void RocketLogisticModel::pack(ModelFile& mf, const std::string& p) const {
  mf.put_u64(p + "seed", rocket_.seed);
  mf.put_u64(p + "n_kernels", static_cast<uint64_t>(rocket_.kernels.size()));
  mf.put_u64(p + "d", static_cast<uint64_t>(rocket_.d));
  mf.put_u64(p + "L", static_cast<uint64_t>(rocket_.L));
  mf.put_vec(p + "mean", std_.mean);
  mf.put_vec(p + "scale", std_.scale);
  mf.put_mat(p + "weights", logit_.weights);
  mf.put_vec(p + "intercept", logit_.intercept);
  mf.put_u64(p + "iterations", static_cast<uint64_t>(logit_.iterations));
  mf.put_u64(p + "converged", logit_.converged ? 1 : 0);
}

RocketLogisticModel RocketLogisticModel::unpack(const ModelFile& mf, const std::string& p) {
  RocketLogisticModel m;
  m.rocket_ = sample_kernels(mf.geti(p + "d"), mf.geti(p + "L"), mf.geti(p + "n_kernels"),
                             mf.u64(p + "seed"));
  m.std_.mean = mf.vec(p + "mean");
  m.std_.scale = mf.vec(p + "scale");
  m.logit_.weights = mf.mat(p + "weights");
  m.logit_.intercept = mf.vec(p + "intercept");
  m.logit_.iterations = mf.geti(p + "iterations");
  m.logit_.converged = mf.u64(p + "converged") != 0;
  if (m.logit_.n_features() != m.rocket_.n_features() ||
      m.std_.mean.size() != static_cast<size_t>(m.rocket_.n_features()) ||
      m.std_.scale.size() != m.std_.mean.size() ||
      m.logit_.intercept.size() != static_cast<size_t>(m.logit_.n_classes()))
    throw DimensionMismatch("rocket_logistic sidecar fields disagree on sizes");
  return m;
}

void RocketLogisticModel::save(const std::filesystem::path& path) const {
  ModelFile mf("rocket_logistic");
  pack(mf, "");
  mf.save(path);
}

RocketLogisticModel RocketLogisticModel::load(const std::filesystem::path& path) {
  ModelFile mf = ModelFile::load(path);
  if (mf.type() != "rocket_logistic")
    throw DimensionMismatch("expected a rocket_logistic sidecar, got " + mf.type());
  return unpack(mf, "");
}

// --- rocket + ridge -----------------------------------------------------------

RocketRidgeModel RocketRidgeModel::train(const LabeledDataset& ds, int n_kernels, uint64_t seed) {
  RocketRidgeModel m;
  m.rocket_ = sample_kernels(ds.channels(), ds.length(), n_kernels, seed);
  Matrix x = rocket_transform(m.rocket_, ds);
  m.std_.fit(x);
  m.std_.apply(x);
  m.ridge_ = ridge_fit_cv(x, ds.labels(), ds.n_classes());
  return m;
}

std::vector<double> RocketRidgeModel::predict_proba(const MultiSeries& x) const {
  std::vector<double> f = rocket_transform_one(rocket_, x);
  std_.apply(f);
  return softmax(ridge_scores(ridge_, f.data(), static_cast<int>(f.size())));
}

void RocketRidgeModel::save(const std::filesystem::path& path) const {
  ModelFile mf("rocket_ridge");
  mf.put_u64("seed", rocket_.seed);
  mf.put_u64("n_kernels", static_cast<uint64_t>(rocket_.kernels.size()));
  mf.put_u64("d", static_cast<uint64_t>(rocket_.d));
  mf.put_u64("L", static_cast<uint64_t>(rocket_.L));
  mf.put_vec("mean", std_.mean);
  mf.put_vec("scale", std_.scale);
  mf.put_mat("weights", ridge_.weights);
  mf.put_vec("intercept", ridge_.intercept);
  mf.put_vec("alpha", {ridge_.alpha});
  mf.save(path);
}

RocketRidgeModel RocketRidgeModel::load(const std::filesystem::path& path) {
  ModelFile mf = ModelFile::load(path);
  if (mf.type() != "rocket_ridge")
    throw DimensionMismatch("expected a rocket_ridge sidecar, got " + mf.type());
  RocketRidgeModel m;
  m.rocket_ = sample_kernels(mf.geti("d"), mf.geti("L"), mf.geti("n_kernels"), mf.u64("seed"));
  m.std_.mean = mf.vec("mean");
  m.std_.scale = mf.vec("scale");
  m.ridge_.weights = mf.mat("weights");
  m.ridge_.intercept = mf.vec("intercept");
  m.ridge_.alpha = mf.vec("alpha").at(0);
  if (m.ridge_.n_features() != m.rocket_.n_features() ||
      m.std_.mean.size() != static_cast<size_t>(m.rocket_.n_features()))
    throw DimensionMismatch("rocket_ridge sidecar fields disagree on sizes");
  return m;
}

// --- ridge on concatenated raw values ------------------------------------------

RidgeConcatModel RidgeConcatModel::train(const LabeledDataset& ds) {
  RidgeConcatModel m;
  m.d_ = ds.channels();
  m.L_ = ds.length();
  Matrix x(ds.size(), m.d_ * m.L_);
  for (int i = 0; i < ds.size(); ++i) {
    MultiSeries flat = concat_channels(ds.instance(i));
    std::copy(flat.values().row(0), flat.values().row(0) + x.cols(), x.row(i));
  }
  m.ridge_ = ridge_fit_cv(x, ds.labels(), ds.n_classes());
  return m;
}

std::vector<double> RidgeConcatModel::predict_proba(const MultiSeries& x) const {
  if (x.channels() != d_ || x.length() != L_)
    throw ShapeMismatch("series shape does not match ridge model");
  MultiSeries flat = concat_channels(x);
  return softmax(ridge_scores(ridge_, flat.values().row(0), d_ * L_));
}

SaliencyMap RidgeConcatModel::explain(int cls) const {
  return ridge_explanation(ridge_, cls, d_, L_);
}

void RidgeConcatModel::save(const std::filesystem::path& path) const {
  ModelFile mf("ridge_concat");
  mf.put_u64("d", static_cast<uint64_t>(d_));
  mf.put_u64("L", static_cast<uint64_t>(L_));
  mf.put_mat("weights", ridge_.weights);
  mf.put_vec("intercept", ridge_.intercept);
  mf.put_vec("alpha", {ridge_.alpha});
  mf.save(path);
}

RidgeConcatModel RidgeConcatModel::load(const std::filesystem::path& path) {
  ModelFile mf = ModelFile::load(path);
  if (mf.type() != "ridge_concat")
    throw DimensionMismatch("expected a ridge_concat sidecar, got " + mf.type());
  RidgeConcatModel m;
  m.d_ = mf.geti("d");
  m.L_ = mf.geti("L");
  m.ridge_.weights = mf.mat("weights");
  m.ridge_.intercept = mf.vec("intercept");
  m.ridge_.alpha = mf.vec("alpha").at(0);
  if (m.ridge_.n_features() != m.d_ * m.L_)
    throw DimensionMismatch("ridge_concat sidecar fields disagree on sizes");
  return m;
}

// --- per-channel ensemble -------------------------------------------------------

LabeledDataset channel_dataset(const LabeledDataset& ds, int c) {
  if (c < 0 || c >= ds.channels()) throw DomainError("channel index out of range");
  std::vector<MultiSeries> slices;
  slices.reserve(static_cast<size_t>(ds.size()));
  for (int i = 0; i < ds.size(); ++i) slices.push_back(channel_slice(ds.instance(i), c));
  return LabeledDataset(std::move(slices), ds.labels(), ds.n_classes(), ds.seed(),
                        ds.name() + "-ch" + std::to_string(c));
}

MultiSeries channel_slice(const MultiSeries& x, int c) {
  Matrix row(1, x.length());
  for (int t = 0; t < x.length(); ++t) row(0, t) = x.at(c, t);
  return MultiSeries(std::move(row));
}

ChannelEnsemble ChannelEnsemble::train(const LabeledDataset& ds,
                                       const RocketLogisticModel::Config& cfg) {
  ChannelEnsemble e;
  e.members_.reserve(static_cast<size_t>(ds.channels()));
  for (int c = 0; c < ds.channels(); ++c) {
    RocketLogisticModel::Config member_cfg = cfg;
    member_cfg.seed = derive_seed(cfg.seed, {static_cast<uint64_t>(c)});
    e.members_.push_back(RocketLogisticModel::train(channel_dataset(ds, c), member_cfg));
  }
  return e;
}

std::vector<double> ChannelEnsemble::predict_proba(const MultiSeries& x) const {
  if (x.channels() != channels()) throw ShapeMismatch("channel count does not match ensemble");
  std::vector<double> acc(static_cast<size_t>(n_classes()), 0.0);
  for (int c = 0; c < channels(); ++c) {
    auto p = members_[static_cast<size_t>(c)].predict_proba(channel_slice(x, c));
    for (size_t k = 0; k < acc.size(); ++k) acc[k] += p[k];
  }
  for (double& v : acc) v /= channels();
  return acc;
}

void ChannelEnsemble::save(const std::filesystem::path& path) const {
  ModelFile mf("channel_ensemble");
  mf.put_u64("channels", static_cast<uint64_t>(members_.size()));
  for (size_t c = 0; c < members_.size(); ++c)
    members_[c].pack(mf, "m" + std::to_string(c) + "_");
  mf.save(path);
}

ChannelEnsemble ChannelEnsemble::load(const std::filesystem::path& path) {
  ModelFile mf = ModelFile::load(path);
  if (mf.type() != "channel_ensemble")
    throw DimensionMismatch("expected a channel_ensemble sidecar, got " + mf.type());
  ChannelEnsemble e;
  int d = mf.geti("channels");
  if (d < 1) throw DimensionMismatch("ensemble needs at least one member");
  e.members_.reserve(static_cast<size_t>(d));
  for (int c = 0; c < d; ++c)
    e.members_.push_back(RocketLogisticModel::unpack(mf, "m" + std::to_string(c) + "_"));
  return e;
}

}  // namespace tsxai
