#include "evalgt.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace tsxai {

namespace {

void check_shapes(const SaliencyMap& w, const GroundTruthMask& g) {
  if (w.channels() != g.channels() || w.segments() != g.segments())
    throw ShapeMismatch("saliency map " + std::to_string(w.channels()) + "x" +
                        std::to_string(w.segments()) + " does not match mask " +
                        std::to_string(g.channels()) + "x" + std::to_string(g.segments()));
}

// (score, is_relevant) pairs, cell order (channel, time).
std::vector<std::pair<double, int>> scored_cells(const SaliencyMap& w, const GroundTruthMask& g) {
  std::vector<std::pair<double, int>> cells;
  cells.reserve(static_cast<size_t>(w.channels()) * static_cast<size_t>(w.segments()));
  for (int c = 0; c < w.channels(); ++c)
    for (int s = 0; s < w.segments(); ++s)
      cells.emplace_back(w.at(c, s), g.relevant(c, s) ? 1 : 0);
  return cells;
}

}  // namespace

GtMetrics threshold_metrics(const SaliencyMap& w, const GroundTruthMask& g, double threshold) {
  check_shapes(w, g);
  if (w.scale() != Scale::Rescaled0to100)
    throw NotRescaled("threshold metrics need a 0..100 rescaled map");
  long tp = 0, fp = 0, fn = 0;
  for (int c = 0; c < w.channels(); ++c)
    for (int s = 0; s < w.segments(); ++s) {
      bool predicted = w.at(c, s) > threshold;
      bool actual = g.relevant(c, s);
      if (predicted && actual)
        ++tp;
      else if (predicted)
        ++fp;
      else if (actual)
        ++fn;
    }
  GtMetrics m;
  m.threshold = threshold;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  return m;
}

double roc_auc(const SaliencyMap& w, const GroundTruthMask& g) {
  check_shapes(w, g);
  auto cells = scored_cells(w, g);
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Mann-Whitney with midranks: ties between a positive and a negative
  // contribute exactly 1/2 a pair.
  double rank_sum_pos = 0.0;
  long n_pos = 0, n_neg = 0;
  size_t i = 0;
  while (i < cells.size()) {
    size_t j = i;
    while (j < cells.size() && cells[j].first == cells[i].first) ++j;
    double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k)
      if (cells[k].second) rank_sum_pos += midrank;
    i = j;
  }
  for (const auto& cell : cells) (cell.second ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) throw DegenerateMask("mask must mark both classes");
  double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double pr_auc(const SaliencyMap& w, const GroundTruthMask& g) {
  check_shapes(w, g);
  auto cells = scored_cells(w, g);
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  long total_pos = 0;
  for (const auto& cell : cells) total_pos += cell.second;
  if (total_pos == 0 || total_pos == static_cast<long>(cells.size()))
    throw DegenerateMask("mask must mark both classes");

  // Average precision with equal scores entering as one block.
  double ap = 0.0;
  long tp = 0, seen = 0;
  size_t i = 0;
  while (i < cells.size()) {
    size_t j = i;
    long block_tp = 0;
    while (j < cells.size() && cells[j].first == cells[i].first) {
      block_tp += cells[j].second;
      ++j;
    }
    long prev_tp = tp;
    tp += block_tp;
    seen = static_cast<long>(j);
    if (block_tp > 0) {
      double precision = static_cast<double>(tp) / seen;
      double recall_step = static_cast<double>(tp - prev_tp) / total_pos;
      ap += precision * recall_step;
    }
    i = j;
  }
  return ap;
}

GtMetrics score_map(const SaliencyMap& w, const GroundTruthMask& g, double threshold) {
  GtMetrics m = threshold_metrics(w, g, threshold);
  m.roc_auc = roc_auc(w, g);
  m.pr_auc = pr_auc(w, g);
  return m;
}

std::pair<GtMetrics, std::vector<GtMetrics>> evaluate_explainer(
    const std::vector<SaliencyMap>& maps, const GroundTruthMask& g, double threshold) {
  if (maps.empty()) throw DimensionMismatch("no maps to evaluate");
  std::vector<GtMetrics> per_instance;
  per_instance.reserve(maps.size());
  GtMetrics mean;
  mean.threshold = threshold;
  for (const auto& w : maps) {
    GtMetrics m = score_map(w, g, threshold);
    mean.precision += m.precision;
    mean.recall += m.recall;
    mean.f1 += m.f1;
    mean.pr_auc += m.pr_auc;
    mean.roc_auc += m.roc_auc;
    per_instance.push_back(m);
  }
  double n = static_cast<double>(maps.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  mean.pr_auc /= n;
  mean.roc_auc /= n;
  return {mean, std::move(per_instance)};
}

std::vector<std::pair<int, double>> rank_channels(const std::vector<SaliencyMap>& maps) {
  if (maps.empty()) throw DimensionMismatch("no maps to rank");
  int d = maps.front().channels(), S = maps.front().segments();
  std::vector<double> importance(static_cast<size_t>(d), 0.0);
  for (const auto& raw : maps) {
    if (raw.channels() != d || raw.segments() != S)
      throw ShapeMismatch("maps disagree on shape");
    SaliencyMap w = rescale_abs_minmax(raw);
    for (int c = 0; c < d; ++c)
      for (int s = 0; s < S; ++s) importance[static_cast<size_t>(c)] += w.at(c, s);
  }
  double denom = static_cast<double>(maps.size()) * S;
  double top = 0.0;
  for (double& v : importance) {
    v /= denom;
    top = std::max(top, v);
  }
  if (top > 0.0)
    for (double& v : importance) v /= top;

  std::vector<std::pair<int, double>> ranked(static_cast<size_t>(d));
  for (int c = 0; c < d; ++c) ranked[static_cast<size_t>(c)] = {c, importance[static_cast<size_t>(c)]};
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

}  // namespace tsxai
