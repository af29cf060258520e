#include "rocket.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace tsxai {

namespace {

const int kLengths[3] = {7, 9, 11};

RocketKernel sample_one(int d, int L, Rng& rng) {
  RocketKernel k;
  k.length = kLengths[rng.uniform_int(0, 2)];

  // Random non-empty channel subset: size uniform in 1..d, members uniform.
  int subset = static_cast<int>(rng.uniform_int(1, d));
  std::vector<int> perm = rng.permutation(d);
  k.channels.assign(perm.begin(), perm.begin() + subset);
  std::sort(k.channels.begin(), k.channels.end());

  // Gaussian weights, centered per channel so the kernel ignores level.
  k.weights.resize(k.channels.size());
  for (auto& w : k.weights) {
    w.resize(static_cast<size_t>(k.length));
    double mean = 0.0;
    for (double& v : w) {
      v = rng.normal();
      mean += v;
    }
    mean /= k.length;
    for (double& v : w) v -= mean;
  }

  k.bias = rng.uniform(-1.0, 1.0);

  // Exponentially distributed dilation capped so the receptive field fits.
  double max_exp = std::log2(static_cast<double>(L - 1) / (k.length - 1));
  if (max_exp < 0.0) max_exp = 0.0;
  k.dilation = static_cast<int>(std::floor(std::exp2(rng.uniform(0.0, max_exp))));
  if (k.dilation < 1) k.dilation = 1;

  k.padding = rng.uniform_int(0, 1) == 1 ? (k.length - 1) * k.dilation / 2 : 0;
  // On series shorter than the receptive field only the padded form can
  // slide at all, so the padding coin loses its say.
  if (k.padding == 0 && (k.length - 1) * k.dilation >= L)
    k.padding = (k.length - 1) * k.dilation / 2;
  return k;
}

}  // namespace

RocketFeatures sample_kernels(int d, int L, int n_kernels, uint64_t seed) {
  if (d < 1 || L < 2) throw ShapeMismatch("kernel sampling needs d >= 1 and L >= 2");
  if (n_kernels < 1) throw DomainError("need at least one kernel");
  RocketFeatures rf;
  rf.d = d;
  rf.L = L;
  rf.seed = seed;
  rf.kernels.resize(static_cast<size_t>(n_kernels));
  for (int i = 0; i < n_kernels; ++i) {
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(i)}));
    rf.kernels[static_cast<size_t>(i)] = sample_one(d, L, rng);
  }
  return rf;
}

void apply_kernel(const RocketKernel& k, const MultiSeries& x, double& ppv, double& max_out) {
  int L = x.length();
  int span = (k.length - 1) * k.dilation;
  int out_len = L + 2 * k.padding - span;
  if (out_len < 1) throw ShapeMismatch("kernel receptive field exceeds padded series");

  int positive = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < out_len; ++t) {
    double z = k.bias;
    for (size_t ci = 0; ci < k.channels.size(); ++ci) {
      const double* row = x.values().row(k.channels[ci]);
      const double* w = k.weights[ci].data();
      int base = t - k.padding;
      for (int j = 0; j < k.length; ++j) {
        int idx = base + j * k.dilation;
        if (idx >= 0 && idx < L) z += w[j] * row[idx];
      }
    }
    if (z > 0.0) ++positive;
    if (z > best) best = z;
  }
  ppv = static_cast<double>(positive) / out_len;
  max_out = best;
}

std::vector<double> rocket_transform_one(const RocketFeatures& rf, const MultiSeries& x) {
  if (x.channels() != rf.d || x.length() != rf.L)
    throw ShapeMismatch("series shape " + std::to_string(x.channels()) + "x" +
                        std::to_string(x.length()) + " does not match kernel bank " +
                        std::to_string(rf.d) + "x" + std::to_string(rf.L));
  std::vector<double> features(static_cast<size_t>(rf.n_features()));
  for (size_t k = 0; k < rf.kernels.size(); ++k)
    apply_kernel(rf.kernels[k], x, features[2 * k], features[2 * k + 1]);
  return features;
}

Matrix rocket_transform(const RocketFeatures& rf, const LabeledDataset& ds) {
  Matrix out(ds.size(), rf.n_features());
  parallel_for(ds.size(), [&](int64_t i) {
    auto features = rocket_transform_one(rf, ds.instance(static_cast<int>(i)));
    std::copy(features.begin(), features.end(), out.row(static_cast<int>(i)));
  });
  return out;
}

}  // namespace tsxai
