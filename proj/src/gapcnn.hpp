#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "classifier.hpp"
#include "matrix.hpp"
#include "tsdata.hpp"

namespace tsxai {

// Cyclic-rotation tensor: row r holds the permuted channel list rotated by
// r, so slot s of row r carries channel perm[(s + r) mod d].  Row 0 of the
// identity permutation reproduces the input series; every row and every
// slot-column contain each channel exactly once.
struct CxTensor {
  int d = 0, L = 0;
  std::vector<double> v;  // [row][slot][time]

  double at(int r, int s, int t) const {
    return v[(static_cast<size_t>(r) * d + s) * L + t];
  }
  double& at(int r, int s, int t) { return v[(static_cast<size_t>(r) * d + s) * L + t]; }
  const double* row(int r) const { return v.data() + static_cast<size_t>(r) * d * L; }
};

CxTensor build_cx(const MultiSeries& x, const std::vector<int>& perm);

struct GapCnnConfig {
  int filters1 = 16;
  int filters2 = 32;
  int epochs = 200;
  int patience = 20;      // epochs without train-loss improvement before stopping
  int batch = 10;
  double lr = 1e-4;       // Adam step size
  uint64_t seed = 0;
  std::string log_path;   // optional epoch,loss,train_acc CSV
};

// Parameter-shaped container for gradients.
struct GapCnnGrads {
  std::vector<double> w1, b1, w2, b2, dense_w, dense_b;
};

// Minimal 2-layer GAP network over CxTensors: each of the d rows is run as
// a 1-channel (slot x time) image through conv 3x3 -> relu -> conv 3x3 ->
// relu, the slot axis is mean-reduced into per-row maps B_f(r, t), global
// average pooling over (r, t) feeds a dense softmax.  The dense weights
// double as the CAM coefficients.
class GapCnnModel : public ProbClassifier {
 public:
  // Fan-in-scaled centered-uniform init, seed-deterministic; biases zero.
  static GapCnnModel init(int d, int L, int classes, const GapCnnConfig& cfg);

  // Minibatch Adam (beta1 0.9, beta2 0.999, eps 1e-8) on cross-entropy over
  // identity-permutation tensors; early stop restores the best-loss epoch.
  static GapCnnModel train(const LabeledDataset& ds, const GapCnnConfig& cfg);

  std::vector<double> predict_proba(const MultiSeries& x) const override;
  int n_classes() const override { return classes_; }

  // CAM per row: entry (r, t) = sum_f dense_w(cls, f) * B_f(r, t).
  // Its (r, t) average equals the class logit minus the intercept.
  Matrix cam_rows(const CxTensor& cx, int cls) const;

  // k-permutation channel attribution: each permutation's CAM row r is
  // credited to the channel that permutation places first in that row
  // (slot 0), accumulating per-(channel, time) mean and variance.  The map
  // is the per-channel-centered mean, with low-variance channels (below the
  // median channel variance) zeroed.  All d! permutations are enumerated
  // when d! <= k; a single channel skips centering and gating entirely.
  SaliencyMap dcam(const MultiSeries& x, int k, uint64_t seed) const;

  // Cross-entropy of one tensor / analytic parameter gradient (the
  // finite-difference test surface).
  double instance_loss(const CxTensor& cx, int label) const;
  GapCnnGrads instance_gradient(const CxTensor& cx, int label, double* loss_out = nullptr,
                                int* pred_out = nullptr) const;

  void save(const std::filesystem::path& path) const;
  static GapCnnModel load(const std::filesystem::path& path);

  int channels() const { return d_; }
  int length() const { return L_; }

  // Parameters are open for the gradient-check harness.
  std::vector<double> w1, b1;  // f1 x 1 x 3 x 3, f1
  std::vector<double> w2, b2;  // f2 x f1 x 3 x 3, f2
  Matrix dense_w;              // classes x f2
  std::vector<double> dense_b;

 private:
  struct Fwd;
  void forward(const CxTensor& cx, Fwd& f, bool keep_activations) const;

  int d_ = 0, L_ = 0, classes_ = 0, f1_ = 0, f2_ = 0;
};

}  // namespace tsxai
