#pragma once

#include <vector>

#include "tsdata.hpp"

namespace tsxai {

// The five ground-truth scores for one saliency map (or their mean).
struct GtMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double pr_auc = 0.0;
  double roc_auc = 0.0;
  double threshold = 50.0;
};

// Thresholded scores: a cell is predicted relevant iff weight > threshold.
// Precision is 0 when nothing is predicted; F1 is 0 when P+R is 0.
// Requires a Rescaled0to100 map of the mask's shape.
GtMetrics threshold_metrics(const SaliencyMap& w, const GroundTruthMask& g,
                            double threshold = 50.0);

// Rank-based ROC AUC (Mann-Whitney with ties counting 1/2) -- exact, no
// trapezoid sampling.  Works on any scale (rank-invariant).
double roc_auc(const SaliencyMap& w, const GroundTruthMask& g);

// Average precision: precision summed over recall steps at each distinct
// score, descending, ties grouped (step interpolation, no trapezoids).
double pr_auc(const SaliencyMap& w, const GroundTruthMask& g);

// All five metrics for one rescaled map.
GtMetrics score_map(const SaliencyMap& w, const GroundTruthMask& g, double threshold = 50.0);

// Per-instance metrics then their arithmetic mean (returned first).
std::pair<GtMetrics, std::vector<GtMetrics>> evaluate_explainer(
    const std::vector<SaliencyMap>& maps, const GroundTruthMask& g, double threshold = 50.0);

// Channel importance: mean over instances and time of the rescaled |weights|,
// divided by the max so the top channel scores 1.0.  Sorted descending,
// ties broken by channel index.
std::vector<std::pair<int, double>> rank_channels(const std::vector<SaliencyMap>& maps);

}  // namespace tsxai
