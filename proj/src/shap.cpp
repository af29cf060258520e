#include "shap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace tsxai {

SegmentSpec segment_bounds(int L, int M) {
  if (M < 1) throw DomainError("need at least one segment");
  if (M > L)
    throw TooManySegments("cannot split length " + std::to_string(L) + " into " +
                          std::to_string(M) + " segments");
  SegmentSpec s;
  s.M = M;
  s.boundaries.resize(static_cast<size_t>(M) + 1);
  int base = L / M, rem = L % M, cursor = 0;
  for (int j = 0; j <= M; ++j) {
    s.boundaries[static_cast<size_t>(j)] = cursor;
    if (j < M) cursor += base + (j < rem ? 1 : 0);
  }
  return s;
}

double shapley_kernel_weight(int M, int z) {
  if (z <= 0 || z >= M)
    throw DomainError("kernel weight undefined for coalition size " + std::to_string(z) +
                      " of " + std::to_string(M));
  // (M-1) / (C(M,z) * z * (M-z)), with C(M,z) built in log space to survive
  // large M.
  double log_comb = 0.0;
  for (int i = 1; i <= z; ++i)
    log_comb += std::log(static_cast<double>(M - z + i)) - std::log(static_cast<double>(i));
  return (M - 1) / (std::exp(log_comb) * z * (M - z));
}

MultiSeries mask_instance(const MultiSeries& x, const std::vector<uint8_t>& coalition,
                          const std::vector<double>& background, const SegmentSpec& seg) {
  if (x.channels() != 1) throw ShapeMismatch("mask_instance expects a univariate series");
  int L = x.length();
  if (static_cast<int>(background.size()) != L)
    throw ShapeMismatch("background length does not match series");
  if (static_cast<int>(coalition.size()) != seg.M)
    throw ShapeMismatch("coalition size does not match segment count");
  if (seg.boundaries.back() != L) throw ShapeMismatch("segments do not cover the series");
  Matrix out(1, L);
  for (int j = 0; j < seg.M; ++j) {
    bool keep = coalition[static_cast<size_t>(j)] != 0;
    for (int t = seg.boundaries[static_cast<size_t>(j)]; t < seg.boundaries[static_cast<size_t>(j) + 1]; ++t)
      out(0, t) = keep ? x.at(0, t) : background[static_cast<size_t>(t)];
  }
  return MultiSeries(std::move(out));
}

namespace {

struct WlsRow {
  std::vector<uint8_t> mask;
  double weight = 1.0;
};

// Solve the kernel-SHAP weighted least squares with the efficiency
// constraint eliminated into the last attribution.  `values` holds v(row)
// aligned with rows; v_empty / v_full anchor the constraint.
ShapExplanation solve_constrained(const std::vector<WlsRow>& rows,
                                  const std::vector<double>& values, int M, double v_empty,
                                  double v_full) {
  ShapExplanation ex;
  ex.base_value = v_empty;
  double total = v_full - v_empty;
  ex.phi.assign(static_cast<size_t>(M), 0.0);
  if (M == 1) {
    ex.phi[0] = total;
    return ex;
  }

  int F = M - 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(F, F);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(F);
  Eigen::VectorXd a(F);
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& mask = rows[r].mask;
    double last = mask[static_cast<size_t>(M - 1)] ? 1.0 : 0.0;
    for (int j = 0; j < F; ++j) a(j) = (mask[static_cast<size_t>(j)] ? 1.0 : 0.0) - last;
    double y = values[r] - v_empty - last * total;
    h.selfadjointView<Eigen::Lower>().rankUpdate(a, rows[r].weight);
    g += rows[r].weight * y * a;
  }
  h = h.selfadjointView<Eigen::Lower>();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  Eigen::VectorXd sol = ldlt.solve(g);
  double residual = (h * sol - g).norm();
  if (!sol.allFinite() || residual > 1e-6 * std::max(1.0, g.norm()))
    throw SingularSystem("kernel SHAP system is degenerate; draw more samples");

  double tail = total;
  for (int j = 0; j < F; ++j) {
    ex.phi[static_cast<size_t>(j)] = sol(j);
    tail -= sol(j);
  }
  ex.phi[static_cast<size_t>(M - 1)] = tail;
  double sum = 0.0;
  for (double p : ex.phi) sum += p;
  ex.efficiency_residual = ex.base_value + sum - v_full;
  return ex;
}

std::vector<double> evaluate_rows(const CoalitionFn& v, const std::vector<WlsRow>& rows) {
  std::vector<double> values(rows.size());
  parallel_for(static_cast<int64_t>(rows.size()),
               [&](int64_t i) { values[static_cast<size_t>(i)] = v(rows[static_cast<size_t>(i)].mask); });
  return values;
}

}  // namespace

ShapExplanation kernel_shap_game(const CoalitionFn& v, int M, int n_samples, uint64_t seed) {
  if (M < 1) throw DomainError("need at least one segment");
  if (n_samples < M + 2)
    throw DomainError("kernel SHAP needs at least M+2 evaluations, got " +
                      std::to_string(n_samples));

  std::vector<uint8_t> empty(static_cast<size_t>(M), 0), full(static_cast<size_t>(M), 1);
  double v_empty = v(empty), v_full = v(full);

  std::vector<WlsRow> rows;
  bool exhaustive = M < 63 && (1ULL << M) <= static_cast<uint64_t>(n_samples);
  if (exhaustive) {
    rows.reserve((1ULL << M) - 2);
    for (uint64_t bits = 1; bits + 1 < (1ULL << M); ++bits) {
      WlsRow row;
      row.mask.resize(static_cast<size_t>(M));
      int z = 0;
      for (int j = 0; j < M; ++j) {
        row.mask[static_cast<size_t>(j)] = (bits >> j) & 1u;
        z += row.mask[static_cast<size_t>(j)];
      }
      row.weight = shapley_kernel_weight(M, z);
      rows.push_back(std::move(row));
    }
  } else {
    // Hybrid scheme: coalition sizes are taken in mirror pairs (z, M-z) from
    // the outside in, and a pair whose complete tier fits the budget is
    // enumerated outright at the exact kernel weight -- the small tiers carry
    // most of the kernel mass and anchor each feature's individual effect.
    // Whatever budget is left is spent on paired random draws from the
    // remaining sizes, which share the remaining kernel mass evenly.
    int budget = n_samples - 2;
    rows.reserve(static_cast<size_t>(budget));

    // tier mass: weight of one size-z subset times the tier count
    auto tier_mass = [M](int z) { return (M - 1) / (static_cast<double>(z) * (M - z)); };
    auto tier_count = [M](int z) {
      double c = 1.0;
      for (int i = 1; i <= z; ++i) {
        c *= static_cast<double>(M - z + i) / i;
        if (c > 1e18) return 1e18;  // effectively unenumerable
      }
      return c;
    };

    int z_lo = 1;
    while (2 * z_lo <= M) {
      int z_hi = M - z_lo;
      double need = tier_count(z_lo) * (z_lo == z_hi ? 1.0 : 2.0);
      if (need > static_cast<double>(budget) - rows.size()) break;
      // lexicographic walk over all size-z_lo subsets
      std::vector<int> comb(static_cast<size_t>(z_lo));
      for (int j = 0; j < z_lo; ++j) comb[static_cast<size_t>(j)] = j;
      double w_lo = shapley_kernel_weight(M, z_lo);
      double w_hi = shapley_kernel_weight(M, z_hi);
      while (true) {
        WlsRow row;
        row.mask.assign(static_cast<size_t>(M), 0);
        for (int idx : comb) row.mask[static_cast<size_t>(idx)] = 1;
        row.weight = w_lo;
        rows.push_back(row);
        if (z_lo != z_hi) {
          for (auto& b : row.mask) b = b ? 0 : 1;
          row.weight = w_hi;
          rows.push_back(std::move(row));
        }
        int i = z_lo - 1;
        while (i >= 0 && comb[static_cast<size_t>(i)] == M - z_lo + i) --i;
        if (i < 0) break;
        ++comb[static_cast<size_t>(i)];
        for (int j = i + 1; j < z_lo; ++j)
          comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
      }
      ++z_lo;
    }

    int n_sampled = budget - static_cast<int>(rows.size());
    if (n_sampled > 0) {
      // kernel mass left in the un-enumerated sizes z_lo .. M-z_lo
      std::vector<double> cdf;
      double acc = 0.0;
      for (int z = z_lo; z <= M - z_lo; ++z) {
        acc += tier_mass(z);
        cdf.push_back(acc);
      }
      double w_each = acc / n_sampled;
      Rng rng(derive_seed(seed, {static_cast<uint64_t>(M)}));
      size_t first_sampled = rows.size();
      while (static_cast<int>(rows.size() - first_sampled) < n_sampled) {
        double u = rng.uniform() * acc;
        int zi = 0;
        while (zi + 1 < static_cast<int>(cdf.size()) && cdf[static_cast<size_t>(zi)] < u) ++zi;
        int z = z_lo + zi;
        std::vector<int> perm = rng.permutation(M);
        WlsRow row;
        row.mask.assign(static_cast<size_t>(M), 0);
        for (int j = 0; j < z; ++j)
          row.mask[static_cast<size_t>(perm[static_cast<size_t>(j)])] = 1;
        row.weight = w_each;
        rows.push_back(row);
        if (static_cast<int>(rows.size() - first_sampled) < n_sampled) {
          for (auto& b : row.mask) b = b ? 0 : 1;
          rows.push_back(std::move(row));
        }
      }
    }
  }

  std::vector<double> values = evaluate_rows(v, rows);
  return solve_constrained(rows, values, M, v_empty, v_full);
}

ShapExplanation exact_shap_game(const CoalitionFn& v, int M) {
  if (M < 1) throw DomainError("need at least one segment");
  if (M > 12)
    throw TooManySegments("exact Shapley enumeration capped at 12 segments, got " +
                          std::to_string(M));
  uint32_t n = 1u << M;
  std::vector<double> cache(n);
  parallel_for(n, [&](int64_t bits) {
    std::vector<uint8_t> mask(static_cast<size_t>(M));
    for (int j = 0; j < M; ++j) mask[static_cast<size_t>(j)] = (static_cast<uint32_t>(bits) >> j) & 1u;
    cache[static_cast<size_t>(bits)] = v(mask);
  });

  std::vector<double> fact(static_cast<size_t>(M) + 1, 1.0);
  for (int i = 1; i <= M; ++i) fact[static_cast<size_t>(i)] = fact[static_cast<size_t>(i - 1)] * i;

  ShapExplanation ex;
  ex.base_value = cache[0];
  ex.phi.assign(static_cast<size_t>(M), 0.0);
  for (int i = 0; i < M; ++i) {
    double phi = 0.0;
    for (uint32_t s = 0; s < n; ++s) {
      if (s & (1u << i)) continue;
      int z = std::popcount(s);
      double coeff = fact[static_cast<size_t>(z)] * fact[static_cast<size_t>(M - 1 - z)] /
                     fact[static_cast<size_t>(M)];
      phi += coeff * (cache[s | (1u << i)] - cache[s]);
    }
    ex.phi[static_cast<size_t>(i)] = phi;
  }
  double sum = 0.0;
  for (double p : ex.phi) sum += p;
  ex.efficiency_residual = ex.base_value + sum - cache[n - 1];
  return ex;
}

namespace {

CoalitionFn series_game(const ProbFn& predict, const MultiSeries& x,
                        const std::vector<double>& background, const SegmentSpec& seg, int cls) {
  return [&predict, &x, &background, seg, cls](const std::vector<uint8_t>& mask) {
    auto proba = predict(mask_instance(x, mask, background, seg));
    if (cls < 0 || cls >= static_cast<int>(proba.size()))
      throw DomainError("class index out of range for model output");
    return proba[static_cast<size_t>(cls)];
  };
}

}  // namespace

ShapExplanation kernel_shap(const ProbFn& predict, const MultiSeries& x, int M, int n_samples,
                            const std::vector<double>& background, int cls, uint64_t seed) {
  SegmentSpec seg = segment_bounds(x.length(), M);
  return kernel_shap_game(series_game(predict, x, background, seg, cls), M, n_samples, seed);
}

ShapExplanation exact_shap(const ProbFn& predict, const MultiSeries& x, int M,
                           const std::vector<double>& background, int cls) {
  SegmentSpec seg = segment_bounds(x.length(), M);
  return exact_shap_game(series_game(predict, x, background, seg, cls), M);
}

Matrix training_mean(const LabeledDataset& ds) {
  Matrix mean(ds.channels(), ds.length());
  for (int i = 0; i < ds.size(); ++i) {
    const Matrix& v = ds.instance(i).values();
    for (int c = 0; c < mean.rows(); ++c)
      for (int t = 0; t < mean.cols(); ++t) mean(c, t) += v(c, t);
  }
  for (int c = 0; c < mean.rows(); ++c)
    for (int t = 0; t < mean.cols(); ++t) mean(c, t) /= ds.size();
  return mean;
}

int default_shap_samples(int M) {
  if (M < 1) throw DomainError("need at least one segment");
  if (M <= 11) {
    int full = 1 << M;
    return full < 2048 ? full : 2048;
  }
  return 2048;
}

SaliencyMap explain_concatenated(const ProbClassifier& model, const MultiSeries& x,
                                 const std::vector<double>& background, int per_channel_segments,
                                 int n_samples, uint64_t seed) {
  int d = x.channels(), L = x.length();
  MultiSeries flat = concat_channels(x);
  if (static_cast<int>(background.size()) != d * L)
    throw ShapeMismatch("background length does not match concatenated series");
  int M = d * per_channel_segments;
  if (n_samples <= 0) n_samples = default_shap_samples(M);
  int cls = model.predict(flat);
  ProbFn predict = [&model](const MultiSeries& s) { return model.predict_proba(s); };
  ShapExplanation ex = kernel_shap(predict, flat, M, n_samples, background, cls, seed);

  Matrix phi(1, M);
  for (int j = 0; j < M; ++j) phi(0, j) = ex.phi[static_cast<size_t>(j)];
  int width = L % per_channel_segments == 0 ? L / per_channel_segments : 1;
  SaliencyMap row(std::move(phi), Scale::Raw, width);
  return unflatten_saliency(row, d, per_channel_segments);
}

SaliencyMap explain_channel_by_channel(const ChannelEnsemble& ensemble, const MultiSeries& x,
                                       const Matrix& background, int segments, int n_samples,
                                       uint64_t seed) {
  int d = x.channels(), L = x.length();
  if (ensemble.channels() != d) throw ShapeMismatch("ensemble channel count does not match series");
  if (background.rows() != d || background.cols() != L)
    throw ShapeMismatch("background shape does not match series");
  if (n_samples <= 0) n_samples = default_shap_samples(segments);
  int cls = ensemble.predict(x);

  Matrix out(d, segments);
  for (int c = 0; c < d; ++c) {
    MultiSeries slice = channel_slice(x, c);
    std::vector<double> bg(background.row(c), background.row(c) + L);
    const RocketLogisticModel& member = ensemble.member(c);
    ProbFn predict = [&member](const MultiSeries& s) { return member.predict_proba(s); };
    ShapExplanation ex = kernel_shap(predict, slice, segments, n_samples, bg, cls,
                                     derive_seed(seed, {static_cast<uint64_t>(c)}));
    for (int j = 0; j < segments; ++j) out(c, j) = ex.phi[static_cast<size_t>(j)];
  }
  int width = L % segments == 0 ? L / segments : 1;
  return SaliencyMap(std::move(out), Scale::Raw, width);
}

}  // namespace tsxai
