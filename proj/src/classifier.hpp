#pragma once

#include <algorithm>
#include <vector>

#include "tsdata.hpp"

namespace tsxai {

// Minimal interface shared by every trained classifier: class probabilities
// for one series.  predict breaks ties toward the lower class index.
class ProbClassifier {
 public:
  virtual ~ProbClassifier() = default;
  virtual std::vector<double> predict_proba(const MultiSeries& x) const = 0;
  virtual int n_classes() const = 0;

  int predict(const MultiSeries& x) const {
    auto p = predict_proba(x);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  double accuracy(const LabeledDataset& ds) const {
    int hits = 0;
    for (int i = 0; i < ds.size(); ++i)
      if (predict(ds.instance(i)) == ds.label(i)) ++hits;
    return static_cast<double>(hits) / ds.size();
  }
};

}  // namespace tsxai
