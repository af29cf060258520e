#pragma once

#include <cstdint>
#include <vector>

#include "matrix.hpp"
#include "tsdata.hpp"

namespace tsxai {

// One random convolution kernel over a channel subset.
struct RocketKernel {
  int length = 0;                             // 7, 9, or 11
  std::vector<int> channels;                  // sorted, non-empty subset
  std::vector<std::vector<double>> weights;   // per subset channel, centered N(0,1)
  double bias = 0.0;                          // U(-1, 1)
  int dilation = 1;                           // floor(2^x), x ~ U(0, log2((L-1)/(len-1)))
  int padding = 0;                            // 0 or (len-1)*dilation/2, coin flip
};

// A sampled kernel bank fixed to one input shape.  Kernel k draws from the
// stream derive_seed(seed, {k}), so the bank is independent of sampling
// order and can be reproduced from (d, L, n_kernels, seed) alone.
struct RocketFeatures {
  int d = 0;
  int L = 0;
  uint64_t seed = 0;
  std::vector<RocketKernel> kernels;
  int n_features() const { return static_cast<int>(kernels.size()) * 2; }
};

RocketFeatures sample_kernels(int d, int L, int n_kernels, uint64_t seed);

// Sliding dot product with zero padding; writes the fraction of positive
// activations and the max activation.
void apply_kernel(const RocketKernel& k, const MultiSeries& x, double& ppv, double& max_out);

// (ppv, max) pairs for every kernel: 2*n_kernels values, kernel-major.
std::vector<double> rocket_transform_one(const RocketFeatures& rf, const MultiSeries& x);

// n x (2*n_kernels) feature matrix, parallel over instances.
Matrix rocket_transform(const RocketFeatures& rf, const LabeledDataset& ds);

}  // namespace tsxai
