#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "rng.hpp"
#include "shap.hpp"

using namespace tsxai;

namespace {

// Linear-plus-pairwise game with a known closed-form attribution:
// v(S) = c + sum_{i in S} a_i + sum_{i<j in S} b_ij, phi_i = a_i + sum_j b_ij / 2.
struct PolyGame {
  int M;
  double c;
  std::vector<double> a;
  Matrix b;  // symmetric, zero diagonal

  static PolyGame random(int M, uint64_t seed) {
    PolyGame g;
    g.M = M;
    Rng rng(seed);
    g.c = rng.normal();
    g.a.resize(static_cast<size_t>(M));
    for (double& v : g.a) v = rng.normal();
    g.b = Matrix(M, M, 0.0);
    for (int i = 0; i < M; ++i)
      for (int j = i + 1; j < M; ++j) g.b(i, j) = g.b(j, i) = rng.normal();
    return g;
  }

  double value(const std::vector<uint8_t>& z) const {
    double v = c;
    for (int i = 0; i < M; ++i) {
      if (!z[static_cast<size_t>(i)]) continue;
      v += a[static_cast<size_t>(i)];
      for (int j = i + 1; j < M; ++j)
        if (z[static_cast<size_t>(j)]) v += b(i, j);
    }
    return v;
  }

  double phi(int i) const {
    double p = a[static_cast<size_t>(i)];
    for (int j = 0; j < M; ++j) p += b(i, j) / 2.0;
    return p;
  }

  CoalitionFn fn() const {
    return [this](const std::vector<uint8_t>& z) { return value(z); };
  }
};

}  // namespace

TEST_CASE("segment boundaries cover [0, L] nearly equally") {
  SegmentSpec s = segment_bounds(10, 3);
  REQUIRE(s.boundaries.size() == 4);
  CHECK(s.boundaries.front() == 0);
  CHECK(s.boundaries.back() == 10);
  // 10 = 4 + 3 + 3: earlier segments absorb the remainder
  CHECK(s.boundaries[1] - s.boundaries[0] == 4);
  CHECK(s.boundaries[2] - s.boundaries[1] == 3);
  CHECK(s.boundaries[3] - s.boundaries[2] == 3);

  SegmentSpec even = segment_bounds(12, 4);
  for (int i = 0; i < 4; ++i) CHECK(even.boundaries[static_cast<size_t>(i + 1)] -
                                    even.boundaries[static_cast<size_t>(i)] == 3);
  CHECK_THROWS_AS(segment_bounds(3, 5), TooManySegments);
}

TEST_CASE("the kernel weight follows the Shapley kernel formula") {
  // M=4: (M-1) / (C(M,z) z (M-z))
  CHECK(shapley_kernel_weight(4, 1) == doctest::Approx(3.0 / (4 * 1 * 3)));
  CHECK(shapley_kernel_weight(4, 2) == doctest::Approx(3.0 / (6 * 2 * 2)));
  CHECK(shapley_kernel_weight(4, 3) == doctest::Approx(3.0 / (4 * 3 * 1)));
  CHECK(shapley_kernel_weight(6, 2) == doctest::Approx(shapley_kernel_weight(6, 4)));
  // weights grow toward the extremes
  CHECK(shapley_kernel_weight(8, 1) > shapley_kernel_weight(8, 4));
}

TEST_CASE("mask_instance splices x and background by segment") {
  Matrix xv(1, 6);
  for (int t = 0; t < 6; ++t) xv(0, t) = 10.0 + t;
  std::vector<double> bg = {0, 1, 2, 3, 4, 5};
  SegmentSpec seg = segment_bounds(6, 3);
  MultiSeries masked = mask_instance(MultiSeries(xv), {1, 0, 1}, bg, seg);
  for (int t = 0; t < 2; ++t) CHECK(masked.at(0, t) == 10.0 + t);  // kept
  for (int t = 2; t < 4; ++t) CHECK(masked.at(0, t) == bg[static_cast<size_t>(t)]);
  for (int t = 4; t < 6; ++t) CHECK(masked.at(0, t) == 10.0 + t);
}

TEST_CASE("exact Shapley matches the closed form of polynomial games") {
  for (int m = 3; m <= 8; ++m) {
    PolyGame g = PolyGame::random(m, 100 + static_cast<uint64_t>(m));
    ShapExplanation e = exact_shap_game(g.fn(), m);
    REQUIRE(static_cast<int>(e.phi.size()) == m);
    for (int i = 0; i < m; ++i)
      CHECK(e.phi[static_cast<size_t>(i)] == doctest::Approx(g.phi(i)).epsilon(1e-9));
    CHECK(e.base_value == doctest::Approx(g.c).epsilon(1e-9));
    CHECK(std::abs(e.efficiency_residual) < 1e-9);
  }
}

TEST_CASE("exhaustive kernel SHAP reproduces exact Shapley") {
  for (int m = 3; m <= 10; ++m) {
    PolyGame g = PolyGame::random(m, 200 + static_cast<uint64_t>(m));
    ShapExplanation exact = exact_shap_game(g.fn(), std::min(m, 12));
    ShapExplanation kern = kernel_shap_game(g.fn(), m, 1 << m, 0);
    for (int i = 0; i < m; ++i)
      CHECK(kern.phi[static_cast<size_t>(i)] ==
            doctest::Approx(exact.phi[static_cast<size_t>(i)]).epsilon(1e-6));
    CHECK(std::abs(kern.efficiency_residual) < 1e-9);
  }
}

TEST_CASE("dummy features get zero attribution") {
  // feature 2 never enters the value
  auto v = [](const std::vector<uint8_t>& z) {
    return 1.5 * z[0] - 0.5 * z[1] + 2.0 * z[0] * z[1];
  };
  ShapExplanation e = kernel_shap_game(v, 3, 8, 0);
  CHECK(std::abs(e.phi[2]) < 1e-9);
  ShapExplanation x = exact_shap_game(v, 3);
  CHECK(std::abs(x.phi[2]) < 1e-9);
}

TEST_CASE("symmetric features get equal attribution") {
  auto v = [](const std::vector<uint8_t>& z) {
    return static_cast<double>(z[0] + z[1]) + 3.0 * z[0] * z[1] + 0.25 * z[2];
  };
  ShapExplanation e = kernel_shap_game(v, 3, 8, 0);
  CHECK(std::abs(e.phi[0] - e.phi[1]) < 1e-9);
  ShapExplanation x = exact_shap_game(v, 3);
  CHECK(std::abs(x.phi[0] - x.phi[1]) < 1e-9);
}

TEST_CASE("sampled kernel SHAP is exact on linear games and deterministic") {
  // with no interactions the WLS fit recovers the coefficients from any
  // full-rank sample, so even the sampled path is exact
  PolyGame g = PolyGame::random(15, 300);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j) g.b(i, j) = 0.0;
  ShapExplanation a = kernel_shap_game(g.fn(), 15, 1500, 42);  // 1500 < 2^15: sampled
  for (int i = 0; i < 15; ++i)
    CHECK(a.phi[static_cast<size_t>(i)] == doctest::Approx(g.phi(i)).epsilon(1e-6));
  CHECK(std::abs(a.efficiency_residual) < 1e-9);

  ShapExplanation b = kernel_shap_game(g.fn(), 15, 1500, 42);
  for (int i = 0; i < 15; ++i) CHECK(a.phi[static_cast<size_t>(i)] == b.phi[static_cast<size_t>(i)]);
}

TEST_CASE("sampled kernel SHAP approximates interacting games") {
  PolyGame g = PolyGame::random(14, 301);
  ShapExplanation est = kernel_shap_game(g.fn(), 14, 4000, 7);
  double worst = 0.0;
  for (int i = 0; i < 14; ++i)
    worst = std::max(worst, std::abs(est.phi[static_cast<size_t>(i)] - g.phi(i)));
  CHECK(worst < 0.35);  // sampling noise, not equality
  CHECK(std::abs(est.efficiency_residual) < 1e-9);
}

TEST_CASE("exact enumeration refuses oversized games") {
  auto v = [](const std::vector<uint8_t>&) { return 0.0; };
  CHECK_THROWS_AS(exact_shap_game(v, 13), TooManySegments);
  CHECK_THROWS_AS(kernel_shap_game(v, 0, 8, 0), DomainError);
}

TEST_CASE("default sample budget is min(2^M, 2048)") {
  CHECK(default_shap_samples(3) == 8);
  CHECK(default_shap_samples(11) == 2048);
  CHECK(default_shap_samples(20) == 2048);
  CHECK(default_shap_samples(40) == 2048);  // no overflow
}

TEST_CASE("training_mean averages per time point") {
  Matrix a(2, 2), b(2, 2);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(1, 0) = 3;
  a(1, 1) = 4;
  b(0, 0) = 5;
  b(0, 1) = 6;
  b(1, 0) = 7;
  b(1, 1) = 8;
  LabeledDataset ds({MultiSeries(a), MultiSeries(b)}, {0, 1}, 2);
  Matrix m = training_mean(ds);
  CHECK(m(0, 0) == 3.0);
  CHECK(m(0, 1) == 4.0);
  CHECK(m(1, 0) == 5.0);
  CHECK(m(1, 1) == 6.0);
}

TEST_CASE("series-level games read the requested class probability") {
  // deterministic stand-in classifier: p(class 1) = sigmoid(sum of values)
  auto predict = [](const MultiSeries& x) {
    double s = 0.0;
    for (int c = 0; c < x.channels(); ++c)
      for (int t = 0; t < x.length(); ++t) s += x.at(c, t);
    double p1 = 1.0 / (1.0 + std::exp(-s));
    return std::vector<double>{1.0 - p1, p1};
  };
  Matrix xv(1, 4);
  for (int t = 0; t < 4; ++t) xv(0, t) = t + 1.0;
  std::vector<double> bg(4, 0.0);
  MultiSeries x(xv);

  ShapExplanation e1 = exact_shap(predict, x, 4, bg, 1);
  ShapExplanation e0 = exact_shap(predict, x, 4, bg, 0);
  // complementary classes attribute with opposite signs
  for (int i = 0; i < 4; ++i)
    CHECK(e1.phi[static_cast<size_t>(i)] ==
          doctest::Approx(-e0.phi[static_cast<size_t>(i)]).epsilon(1e-9));
  // efficiency ties the sum to the full-coalition probability
  std::vector<uint8_t> all(4, 1);
  double full = predict(x)[1];
  double sum = e1.base_value;
  for (double p : e1.phi) sum += p;
  CHECK(sum == doctest::Approx(full).epsilon(1e-9));

  ShapExplanation k1 = kernel_shap(predict, x, 4, 16, bg, 1, 3);
  for (int i = 0; i < 4; ++i)
    CHECK(k1.phi[static_cast<size_t>(i)] ==
          doctest::Approx(e1.phi[static_cast<size_t>(i)]).epsilon(1e-6));
}
