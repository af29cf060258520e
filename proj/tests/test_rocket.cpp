#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "rng.hpp"
#include "rocket.hpp"
#include "synthgen.hpp"

using namespace tsxai;

namespace {

MultiSeries random_series(int d, int L, uint64_t seed) {
  Matrix x(d, L);
  Rng rng(seed);
  for (int c = 0; c < d; ++c)
    for (int t = 0; t < L; ++t) x(c, t) = rng.normal();
  return MultiSeries(x);
}

// Slow reference: materialize the whole activation sequence, then reduce.
void naive_apply(const RocketKernel& k, const MultiSeries& x, double& ppv, double& max_out) {
  int L = x.length();
  int out_len = L + 2 * k.padding - (k.length - 1) * k.dilation;
  std::vector<double> activations;
  for (int t = 0; t < out_len; ++t) {
    double z = k.bias;
    for (size_t ci = 0; ci < k.channels.size(); ++ci)
      for (int j = 0; j < k.length; ++j) {
        int idx = t - k.padding + j * k.dilation;
        if (idx >= 0 && idx < L) z += k.weights[ci][static_cast<size_t>(j)] * x.at(k.channels[ci], idx);
      }
    activations.push_back(z);
  }
  int pos = 0;
  max_out = -std::numeric_limits<double>::infinity();
  for (double z : activations) {
    if (z > 0.0) ++pos;
    max_out = std::max(max_out, z);
  }
  ppv = static_cast<double>(pos) / out_len;
}

}  // namespace

TEST_CASE("sampled kernels respect every structural constraint") {
  int d = 5, L = 50;
  RocketFeatures rf = sample_kernels(d, L, 300, 9);
  REQUIRE(rf.kernels.size() == 300);
  CHECK(rf.n_features() == 600);
  bool saw7 = false, saw9 = false, saw11 = false, saw_pad = false, saw_nopad = false;
  for (const auto& k : rf.kernels) {
    CHECK((k.length == 7 || k.length == 9 || k.length == 11));
    saw7 = saw7 || k.length == 7;
    saw9 = saw9 || k.length == 9;
    saw11 = saw11 || k.length == 11;
    REQUIRE(!k.channels.empty());
    CHECK(std::is_sorted(k.channels.begin(), k.channels.end()));
    CHECK(k.channels.back() < d);
    CHECK(k.channels.front() >= 0);
    CHECK(std::adjacent_find(k.channels.begin(), k.channels.end()) == k.channels.end());
    REQUIRE(k.weights.size() == k.channels.size());
    for (const auto& w : k.weights) {
      REQUIRE(static_cast<int>(w.size()) == k.length);
      double sum = 0.0;
      for (double v : w) sum += v;
      CHECK(std::abs(sum) < 1e-9);  // centered
    }
    CHECK(k.bias >= -1.0);
    CHECK(k.bias < 1.0);
    CHECK(k.dilation >= 1);
    CHECK((k.length - 1) * k.dilation < L);  // receptive field fits unpadded
    CHECK((k.padding == 0 || k.padding == (k.length - 1) * k.dilation / 2));
    saw_pad = saw_pad || k.padding > 0;
    saw_nopad = saw_nopad || k.padding == 0;
  }
  CHECK(saw7);
  CHECK(saw9);
  CHECK(saw11);
  CHECK(saw_pad);
  CHECK(saw_nopad);
}

TEST_CASE("kernel banks replay from (shape, seed) alone") {
  RocketFeatures a = sample_kernels(4, 30, 50, 21);
  RocketFeatures b = sample_kernels(4, 30, 50, 21);
  RocketFeatures c = sample_kernels(4, 30, 50, 22);
  for (size_t i = 0; i < a.kernels.size(); ++i) {
    CHECK(a.kernels[i].bias == b.kernels[i].bias);
    CHECK(a.kernels[i].weights == b.kernels[i].weights);
    CHECK(a.kernels[i].channels == b.kernels[i].channels);
    CHECK(a.kernels[i].dilation == b.kernels[i].dilation);
    CHECK(a.kernels[i].padding == b.kernels[i].padding);
  }
  // a longer bank shares its prefix: kernel i depends only on (seed, i)
  RocketFeatures longer = sample_kernels(4, 30, 80, 21);
  CHECK(longer.kernels[10].weights == a.kernels[10].weights);
  bool any_diff = false;
  for (size_t i = 0; i < a.kernels.size(); ++i)
    any_diff = any_diff || a.kernels[i].bias != c.kernels[i].bias;
  CHECK(any_diff);
}

TEST_CASE("apply_kernel agrees with the naive convolution") {
  MultiSeries x = random_series(3, 40, 33);
  RocketFeatures rf = sample_kernels(3, 40, 120, 34);
  for (const auto& k : rf.kernels) {
    double ppv = 0, mx = 0, ppv_ref = 0, mx_ref = 0;
    apply_kernel(k, x, ppv, mx);
    naive_apply(k, x, ppv_ref, mx_ref);
    CHECK(ppv == doctest::Approx(ppv_ref).epsilon(1e-12));
    CHECK(mx == doctest::Approx(mx_ref).epsilon(1e-12));
  }
}

TEST_CASE("hand-checked kernel on a tiny series") {
  // one channel, weights {1,-1,0,0,0,0,0} after centering stay as given here
  RocketKernel k;
  k.length = 7;
  k.channels = {0};
  k.weights = {{1.0, -1.0, 0.5, -0.5, 0.25, -0.25, 0.0}};
  k.bias = 0.1;
  k.dilation = 1;
  k.padding = 0;
  Matrix m(1, 10);
  for (int t = 0; t < 10; ++t) m(0, t) = t;  // ramp
  double ppv = 0, mx = 0;
  apply_kernel(k, MultiSeries(m), ppv, mx);
  // every position: 0.1 + (t - (t+1)) + 0.5(t+2) - 0.5(t+3) + 0.25(t+4) - 0.25(t+5)
  //              = 0.1 - 1 - 0.5 - 0.25 = -1.65
  CHECK(mx == doctest::Approx(-1.65).epsilon(1e-12));
  CHECK(ppv == 0.0);
}

TEST_CASE("transform rejects mismatched series shapes") {
  RocketFeatures rf = sample_kernels(3, 40, 10, 1);
  CHECK_THROWS_AS(rocket_transform_one(rf, random_series(2, 40, 2)), ShapeMismatch);
  CHECK_THROWS_AS(rocket_transform_one(rf, random_series(3, 39, 2)), ShapeMismatch);
}

TEST_CASE("transform features are ppv then max, kernel-major, and parallel-safe") {
  SynthSpec spec;
  spec.kind = SynthKind::Gaussian;
  spec.n_train = 8;
  spec.n_test = 2;
  spec.d = 3;
  spec.L = 40;
  spec.box_ch_lo = 0;
  spec.box_ch_hi = 1;
  spec.box_t_lo = 10;
  spec.box_t_hi = 20;
  auto [train, test] = generate_dataset(spec);
  RocketFeatures rf = sample_kernels(3, 40, 25, 5);
  Matrix f = rocket_transform(rf, train);
  REQUIRE(f.rows() == 8);
  REQUIRE(f.cols() == 50);
  for (int i = 0; i < 8; ++i) {
    auto one = rocket_transform_one(rf, train.instance(i));
    for (int j = 0; j < 50; ++j) CHECK(f(i, j) == one[static_cast<size_t>(j)]);
  }
  for (int i = 0; i < 8; ++i)
    for (size_t k = 0; k < rf.kernels.size(); ++k) {
      double ppv = f(i, static_cast<int>(2 * k));
      CHECK(ppv >= 0.0);
      CHECK(ppv <= 1.0);
    }
}
