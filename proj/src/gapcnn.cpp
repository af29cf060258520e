#include "gapcnn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "error.hpp"
#include "io.hpp"
#include "linear.hpp"
#include "modelio.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace tsxai {

CxTensor build_cx(const MultiSeries& x, const std::vector<int>& perm) {
  int d = x.channels(), L = x.length();
  if (static_cast<int>(perm.size()) != d)
    throw InvalidPermutation("permutation length " + std::to_string(perm.size()) +
                             " does not match " + std::to_string(d) + " channels");
  std::vector<int> seen(static_cast<size_t>(d), 0);
  for (int p : perm) {
    if (p < 0 || p >= d || seen[static_cast<size_t>(p)])
      throw InvalidPermutation("not a bijection on [0," + std::to_string(d) + ")");
    seen[static_cast<size_t>(p)] = 1;
  }
  CxTensor cx;
  cx.d = d;
  cx.L = L;
  cx.v.resize(static_cast<size_t>(d) * d * L);
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s) {
      const double* src = x.values().row(perm[static_cast<size_t>((s + r) % d)]);
      std::copy(src, src + L, &cx.at(r, s, 0));
    }
  return cx;
}

namespace {

using ERow = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<ERow>;
using ECMap = Eigen::Map<const ERow>;

// 3x3 same-padding im2col: img is cin x rows x cols, col is (cin*9) x (rows*cols).
void im2col3x3(const double* img, int cin, int rows, int cols, double* col) {
  for (int ic = 0; ic < cin; ++ic) {
    const double* plane = img + static_cast<size_t>(ic) * rows * cols;
    for (int ds = 0; ds < 3; ++ds)
      for (int dt = 0; dt < 3; ++dt) {
        double* out = col + (static_cast<size_t>(ic) * 9 + ds * 3 + dt) *
                              (static_cast<size_t>(rows) * cols);
        for (int s = 0; s < rows; ++s) {
          int sr = s + ds - 1;
          double* row_out = out + static_cast<size_t>(s) * cols;
          if (sr < 0 || sr >= rows) {
            std::fill(row_out, row_out + cols, 0.0);
            continue;
          }
          const double* row_in = plane + static_cast<size_t>(sr) * cols;
          int shift = dt - 1;
          for (int t = 0; t < cols; ++t) {
            int tc = t + shift;
            row_out[t] = (tc >= 0 && tc < cols) ? row_in[tc] : 0.0;
          }
        }
      }
  }
}

// Transpose of im2col3x3: scatter-add columns back onto the image grid.
void col2im3x3(const double* col, int cin, int rows, int cols, double* img) {
  for (int ic = 0; ic < cin; ++ic) {
    double* plane = img + static_cast<size_t>(ic) * rows * cols;
    for (int ds = 0; ds < 3; ++ds)
      for (int dt = 0; dt < 3; ++dt) {
        const double* in = col + (static_cast<size_t>(ic) * 9 + ds * 3 + dt) *
                                   (static_cast<size_t>(rows) * cols);
        for (int s = 0; s < rows; ++s) {
          int sr = s + ds - 1;
          if (sr < 0 || sr >= rows) continue;
          double* row_img = plane + static_cast<size_t>(sr) * cols;
          const double* row_in = in + static_cast<size_t>(s) * cols;
          int shift = dt - 1;
          for (int t = 0; t < cols; ++t) {
            int tc = t + shift;
            if (tc >= 0 && tc < cols) row_img[tc] += row_in[t];
          }
        }
      }
  }
}

}  // namespace

struct GapCnnModel::Fwd {
  std::vector<double> a1;      // d rows x f1 x d x L (post-relu), kept for backward
  std::vector<double> a2;      // d rows x f2 x d x L (post-relu), kept for backward
  std::vector<double> bmaps;   // f2 x d x L: slot-mean of a2 per row
  std::vector<double> g;       // f2
  std::vector<double> logits;  // classes
  std::vector<double> probs;   // classes
  std::vector<double> col1, col2;  // scratch
};

void GapCnnModel::forward(const CxTensor& cx, Fwd& f, bool keep_activations) const {
  if (cx.d != d_ || cx.L != L_) throw ShapeMismatch("tensor shape does not match model");
  int plane = d_ * L_;
  size_t row_a1 = static_cast<size_t>(f1_) * plane;
  size_t row_a2 = static_cast<size_t>(f2_) * plane;
  f.col1.resize(static_cast<size_t>(9) * plane);
  f.col2.resize(static_cast<size_t>(f1_) * 9 * plane);
  if (keep_activations) {
    f.a1.resize(static_cast<size_t>(d_) * row_a1);
    f.a2.resize(static_cast<size_t>(d_) * row_a2);
  } else {
    f.a1.resize(row_a1);
    f.a2.resize(row_a2);
  }
  f.bmaps.assign(row_a2, 0.0);
  f.g.assign(static_cast<size_t>(f2_), 0.0);

  ECMap w1m(w1.data(), f1_, 9);
  ECMap w2m(w2.data(), f2_, f1_ * 9);

  for (int r = 0; r < d_; ++r) {
    double* a1r = f.a1.data() + (keep_activations ? r * row_a1 : 0);
    double* a2r = f.a2.data() + (keep_activations ? r * row_a2 : 0);

    im2col3x3(cx.row(r), 1, d_, L_, f.col1.data());
    EMap(a1r, f1_, plane).noalias() = w1m * ECMap(f.col1.data(), 9, plane);
    for (int oc = 0; oc < f1_; ++oc) {
      double* p = a1r + static_cast<size_t>(oc) * plane;
      double bias = b1[static_cast<size_t>(oc)];
      for (int i = 0; i < plane; ++i) p[i] = std::max(p[i] + bias, 0.0);
    }

    im2col3x3(a1r, f1_, d_, L_, f.col2.data());
    EMap(a2r, f2_, plane).noalias() = w2m * ECMap(f.col2.data(), f1_ * 9, plane);
    for (int oc = 0; oc < f2_; ++oc) {
      double* p = a2r + static_cast<size_t>(oc) * plane;
      double bias = b2[static_cast<size_t>(oc)];
      for (int i = 0; i < plane; ++i) p[i] = std::max(p[i] + bias, 0.0);
    }

    // Slot-mean reduce this row's maps into B_f(r, :).
    for (int oc = 0; oc < f2_; ++oc) {
      const double* p = a2r + static_cast<size_t>(oc) * plane;
      double* brow = f.bmaps.data() + (static_cast<size_t>(oc) * d_ + r) * L_;
      for (int t = 0; t < L_; ++t) {
        double acc = 0.0;
        for (int s = 0; s < d_; ++s) acc += p[static_cast<size_t>(s) * L_ + t];
        brow[t] = acc / d_;
      }
    }
  }

  for (int oc = 0; oc < f2_; ++oc) {
    const double* b = f.bmaps.data() + static_cast<size_t>(oc) * plane;
    double acc = 0.0;
    for (int i = 0; i < plane; ++i) acc += b[i];
    f.g[static_cast<size_t>(oc)] = acc / plane;
  }

  f.logits.assign(static_cast<size_t>(classes_), 0.0);
  for (int c = 0; c < classes_; ++c) {
    double acc = dense_b[static_cast<size_t>(c)];
    for (int oc = 0; oc < f2_; ++oc) acc += dense_w(c, oc) * f.g[static_cast<size_t>(oc)];
    f.logits[static_cast<size_t>(c)] = acc;
  }
  f.probs = softmax(f.logits);
}

GapCnnModel GapCnnModel::init(int d, int L, int classes, const GapCnnConfig& cfg) {
  if (d < 1 || L < 1) throw ShapeMismatch("bad input shape");
  if (classes < 2) throw DimensionMismatch("need at least 2 classes");
  if (cfg.filters1 < 1 || cfg.filters2 < 1) throw DomainError("need at least one filter per layer");
  GapCnnModel m;
  m.d_ = d;
  m.L_ = L;
  m.classes_ = classes;
  m.f1_ = cfg.filters1;
  m.f2_ = cfg.filters2;
  Rng rng(derive_seed(cfg.seed, {0x1217}));
  auto fill = [&rng](std::vector<double>& w, size_t n, int fan_in) {
    double s = std::sqrt(1.0 / fan_in);
    w.resize(n);
    for (double& v : w) v = rng.uniform(-s, s);
  };
  fill(m.w1, static_cast<size_t>(m.f1_) * 9, 9);
  m.b1.assign(static_cast<size_t>(m.f1_), 0.0);
  fill(m.w2, static_cast<size_t>(m.f2_) * m.f1_ * 9, m.f1_ * 9);
  m.b2.assign(static_cast<size_t>(m.f2_), 0.0);
  std::vector<double> dw;
  fill(dw, static_cast<size_t>(classes) * m.f2_, m.f2_);
  m.dense_w = Matrix(classes, m.f2_);
  std::copy(dw.begin(), dw.end(), m.dense_w.data());
  m.dense_b.assign(static_cast<size_t>(classes), 0.0);
  return m;
}

double GapCnnModel::instance_loss(const CxTensor& cx, int label) const {
  if (label < 0 || label >= classes_) throw DomainError("label out of range");
  Fwd f;
  forward(cx, f, false);
  return -std::log(std::max(f.probs[static_cast<size_t>(label)], 1e-300));
}

GapCnnGrads GapCnnModel::instance_gradient(const CxTensor& cx, int label, double* loss_out,
                                           int* pred_out) const {
  if (label < 0 || label >= classes_) throw DomainError("label out of range");
  GapCnnGrads g;
  g.w1.assign(w1.size(), 0.0);
  g.b1.assign(b1.size(), 0.0);
  g.w2.assign(w2.size(), 0.0);
  g.b2.assign(b2.size(), 0.0);
  g.dense_w.assign(static_cast<size_t>(classes_) * f2_, 0.0);
  g.dense_b.assign(static_cast<size_t>(classes_), 0.0);

  Fwd f;
  forward(cx, f, true);
  if (loss_out) *loss_out = -std::log(std::max(f.probs[static_cast<size_t>(label)], 1e-300));
  if (pred_out)
    *pred_out =
        static_cast<int>(std::max_element(f.probs.begin(), f.probs.end()) - f.probs.begin());

  int plane = d_ * L_;
  size_t row_a1 = static_cast<size_t>(f1_) * plane;
  size_t row_a2 = static_cast<size_t>(f2_) * plane;

  // dlogits = probs - onehot(label)
  std::vector<double> dlogits = f.probs;
  dlogits[static_cast<size_t>(label)] -= 1.0;
  for (int c = 0; c < classes_; ++c) {
    g.dense_b[static_cast<size_t>(c)] = dlogits[static_cast<size_t>(c)];
    for (int oc = 0; oc < f2_; ++oc)
      g.dense_w[static_cast<size_t>(c) * f2_ + oc] =
          dlogits[static_cast<size_t>(c)] * f.g[static_cast<size_t>(oc)];
  }
  // dg_f = sum_c dlogits_c * dense_w(c, f); dA2 = dg_f / (d*L*d_slots) through
  // the two mean reductions.
  std::vector<double> dg(static_cast<size_t>(f2_), 0.0);
  for (int oc = 0; oc < f2_; ++oc) {
    double acc = 0.0;
    for (int c = 0; c < classes_; ++c) acc += dlogits[static_cast<size_t>(c)] * dense_w(c, oc);
    dg[static_cast<size_t>(oc)] = acc;
  }

  std::vector<double> dz2(row_a2), dcol2(static_cast<size_t>(f1_) * 9 * plane);
  std::vector<double> da1(row_a1), col(static_cast<size_t>(f1_) * 9 * plane);
  ECMap w2m(w2.data(), f2_, f1_ * 9);
  EMap gw2(g.w2.data(), f2_, f1_ * 9);
  EMap gw1(g.w1.data(), f1_, 9);

  for (int r = 0; r < d_; ++r) {
    const double* a1r = f.a1.data() + static_cast<size_t>(r) * row_a1;
    const double* a2r = f.a2.data() + static_cast<size_t>(r) * row_a2;

    // Through GAP and the slot mean: every (s, t) cell of filter oc in this
    // row receives dg / (plane * d), masked by relu.
    for (int oc = 0; oc < f2_; ++oc) {
      double base = dg[static_cast<size_t>(oc)] / (static_cast<double>(plane) * d_);
      const double* a = a2r + static_cast<size_t>(oc) * plane;
      double* dz = dz2.data() + static_cast<size_t>(oc) * plane;
      double bacc = 0.0;
      for (int i = 0; i < plane; ++i) {
        dz[i] = a[i] > 0.0 ? base : 0.0;
        bacc += dz[i];
      }
      g.b2[static_cast<size_t>(oc)] += bacc;
    }

    im2col3x3(a1r, f1_, d_, L_, col.data());
    gw2.noalias() += EMap(dz2.data(), f2_, plane) * ECMap(col.data(), f1_ * 9, plane).transpose();
    EMap(dcol2.data(), f1_ * 9, plane).noalias() = w2m.transpose() * EMap(dz2.data(), f2_, plane);
    std::fill(da1.begin(), da1.end(), 0.0);
    col2im3x3(dcol2.data(), f1_, d_, L_, da1.data());

    // dz1 = da1 masked by relu; reuse da1 in place.
    for (int oc = 0; oc < f1_; ++oc) {
      const double* a = a1r + static_cast<size_t>(oc) * plane;
      double* dz = da1.data() + static_cast<size_t>(oc) * plane;
      double bacc = 0.0;
      for (int i = 0; i < plane; ++i) {
        if (a[i] <= 0.0) dz[i] = 0.0;
        bacc += dz[i];
      }
      g.b1[static_cast<size_t>(oc)] += bacc;
    }
    im2col3x3(cx.row(r), 1, d_, L_, col.data());
    gw1.noalias() += EMap(da1.data(), f1_, plane) * ECMap(col.data(), 9, plane).transpose();
  }
  return g;
}

namespace {

struct AdamState {
  std::vector<double> m, v;
  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
};

void adam_step(std::vector<double>& w, const std::vector<double>& grad, AdamState& st, double lr,
               double bias1, double bias2) {
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  for (size_t i = 0; i < w.size(); ++i) {
    st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * grad[i];
    st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    double mhat = st.m[i] / bias1;
    double vhat = st.v[i] / bias2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

GapCnnModel GapCnnModel::train(const LabeledDataset& ds, const GapCnnConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch < 1 || !(cfg.lr > 0.0)) throw DomainError("bad training config");
  GapCnnModel m = init(ds.channels(), ds.length(), ds.n_classes(), cfg);
  int n = ds.size();

  std::vector<CxTensor> tensors(static_cast<size_t>(n));
  std::vector<int> identity(static_cast<size_t>(ds.channels()));
  for (int c = 0; c < ds.channels(); ++c) identity[static_cast<size_t>(c)] = c;
  parallel_for(n, [&](int64_t i) {
    tensors[static_cast<size_t>(i)] = build_cx(ds.instance(static_cast<int>(i)), identity);
  });

  AdamState sw1, sb1, sw2, sb2, sdw, sdb;
  sw1.init(m.w1.size());
  sb1.init(m.b1.size());
  sw2.init(m.w2.size());
  sb2.init(m.b2.size());
  sdw.init(static_cast<size_t>(m.classes_) * m.f2_);
  sdb.init(m.dense_b.size());

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path, std::ios::binary);
    if (!log) throw IoError("cannot write " + cfg.log_path);
    log << "epoch,loss,train_acc\n";
  }

  Rng shuffle_rng(derive_seed(cfg.seed, {0x5471}));
  double best_loss = std::numeric_limits<double>::infinity();
  GapCnnModel best = m;
  int stale = 0;
  long step = 0;
  std::vector<double> dense_w_flat(static_cast<size_t>(m.classes_) * m.f2_);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = shuffle_rng.permutation(n);
    double epoch_loss = 0.0;
    int correct = 0;
    for (int start = 0; start < n; start += cfg.batch) {
      int stop = std::min(start + cfg.batch, n);
      GapCnnGrads acc;
      for (int bi = start; bi < stop; ++bi) {
        int i = order[static_cast<size_t>(bi)];
        const CxTensor& cx = tensors[static_cast<size_t>(i)];
        int label = ds.label(i);
        double loss = 0.0;
        int pred = 0;
        GapCnnGrads gi = m.instance_gradient(cx, label, &loss, &pred);
        epoch_loss += loss;
        if (pred == label) ++correct;
        if (acc.w1.empty()) {
          acc = std::move(gi);
        } else {
          auto add = [](std::vector<double>& a, const std::vector<double>& b) {
            for (size_t k = 0; k < a.size(); ++k) a[k] += b[k];
          };
          add(acc.w1, gi.w1);
          add(acc.b1, gi.b1);
          add(acc.w2, gi.w2);
          add(acc.b2, gi.b2);
          add(acc.dense_w, gi.dense_w);
          add(acc.dense_b, gi.dense_b);
        }
      }
      double inv = 1.0 / (stop - start);
      auto scale = [inv](std::vector<double>& a) {
        for (double& v : a) v *= inv;
      };
      scale(acc.w1);
      scale(acc.b1);
      scale(acc.w2);
      scale(acc.b2);
      scale(acc.dense_w);
      scale(acc.dense_b);

      ++step;
      double bias1 = 1.0 - std::pow(0.9, static_cast<double>(step));
      double bias2 = 1.0 - std::pow(0.999, static_cast<double>(step));
      adam_step(m.w1, acc.w1, sw1, cfg.lr, bias1, bias2);
      adam_step(m.b1, acc.b1, sb1, cfg.lr, bias1, bias2);
      adam_step(m.w2, acc.w2, sw2, cfg.lr, bias1, bias2);
      adam_step(m.b2, acc.b2, sb2, cfg.lr, bias1, bias2);
      std::copy(m.dense_w.data(), m.dense_w.data() + dense_w_flat.size(), dense_w_flat.begin());
      adam_step(dense_w_flat, acc.dense_w, sdw, cfg.lr, bias1, bias2);
      std::copy(dense_w_flat.begin(), dense_w_flat.end(), m.dense_w.data());
      adam_step(m.dense_b, acc.dense_b, sdb, cfg.lr, bias1, bias2);
    }
    epoch_loss /= n;
    if (!std::isfinite(epoch_loss))
      throw NonFinite("training loss diverged at epoch " + std::to_string(epoch));
    if (log.is_open())
      log << epoch << ',' << format_double(epoch_loss) << ','
          << format_double(static_cast<double>(correct) / n) << "\n";

    if (epoch_loss < best_loss - 1e-12) {
      best_loss = epoch_loss;
      best = m;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  if (log.is_open()) log.flush();
  return best;
}

std::vector<double> GapCnnModel::predict_proba(const MultiSeries& x) const {
  std::vector<int> identity(static_cast<size_t>(d_));
  for (int c = 0; c < d_; ++c) identity[static_cast<size_t>(c)] = c;
  Fwd f;
  forward(build_cx(x, identity), f, false);
  return f.probs;
}

Matrix GapCnnModel::cam_rows(const CxTensor& cx, int cls) const {
  if (cls < 0 || cls >= classes_) throw DomainError("class index out of range");
  Fwd f;
  forward(cx, f, false);
  Matrix cam(d_, L_);
  for (int oc = 0; oc < f2_; ++oc) {
    double wf = dense_w(cls, oc);
    const double* b = f.bmaps.data() + static_cast<size_t>(oc) * d_ * L_;
    for (int r = 0; r < d_; ++r)
      for (int t = 0; t < L_; ++t) cam(r, t) += wf * b[static_cast<size_t>(r) * L_ + t];
  }
  return cam;
}

SaliencyMap GapCnnModel::dcam(const MultiSeries& x, int k, uint64_t seed) const {
  if (x.channels() != d_ || x.length() != L_)
    throw ShapeMismatch("series shape does not match model");
  if (k < 1) throw DomainError("need at least one permutation");

  std::vector<int> identity(static_cast<size_t>(d_));
  for (int c = 0; c < d_; ++c) identity[static_cast<size_t>(c)] = c;
  Fwd f;
  forward(build_cx(x, identity), f, false);
  int cls = static_cast<int>(std::max_element(f.probs.begin(), f.probs.end()) - f.probs.begin());

  if (d_ == 1) {
    // Single channel: nothing to permute or contrast against.
    return SaliencyMap(cam_rows(build_cx(x, identity), cls), Scale::Raw);
  }

  // Exact enumeration when d! fits the budget, else k seeded draws.
  std::vector<std::vector<int>> perms;
  long long fact = 1;
  bool exhaustive = true;
  for (int i = 2; i <= d_; ++i) {
    fact *= i;
    if (fact > k) {
      exhaustive = false;
      break;
    }
  }
  if (exhaustive) {
    std::vector<int> p = identity;
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
  } else {
    perms.resize(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      Rng rng(derive_seed(seed, {static_cast<uint64_t>(i)}));
      perms[static_cast<size_t>(i)] = rng.permutation(d_);
    }
  }

  // Each permutation yields one CAM value per (channel, time): row r is
  // credited to the channel at its slot 0, perm[r].
  std::vector<Matrix> contribs(perms.size());
  parallel_for(static_cast<int64_t>(perms.size()), [&](int64_t i) {
    const std::vector<int>& p = perms[static_cast<size_t>(i)];
    Matrix cam = cam_rows(build_cx(x, p), cls);
    Matrix by_channel(d_, L_);
    for (int r = 0; r < d_; ++r)
      for (int t = 0; t < L_; ++t) by_channel(p[static_cast<size_t>(r)], t) = cam(r, t);
    contribs[static_cast<size_t>(i)] = std::move(by_channel);
  });

  Matrix mean(d_, L_), meansq(d_, L_);
  for (const Matrix& c : contribs)
    for (int i = 0; i < d_; ++i)
      for (int t = 0; t < L_; ++t) {
        mean(i, t) += c(i, t);
        meansq(i, t) += c(i, t) * c(i, t);
      }
  double inv = 1.0 / static_cast<double>(perms.size());
  for (int c = 0; c < d_; ++c)
    for (int t = 0; t < L_; ++t) {
      mean(c, t) *= inv;
      meansq(c, t) *= inv;
    }

  // Channel variance across permutations (how much the channel's CAM moves
  // when its row position changes); low-variance channels are uninformative.
  std::vector<double> chanvar(static_cast<size_t>(d_), 0.0);
  for (int c = 0; c < d_; ++c) {
    double acc = 0.0;
    for (int t = 0; t < L_; ++t)
      acc += std::max(meansq(c, t) - mean(c, t) * mean(c, t), 0.0);
    chanvar[static_cast<size_t>(c)] = acc / L_;
  }
  std::vector<double> sorted = chanvar;
  std::sort(sorted.begin(), sorted.end());
  double median = d_ % 2 == 1 ? sorted[static_cast<size_t>(d_ / 2)]
                              : 0.5 * (sorted[static_cast<size_t>(d_ / 2 - 1)] +
                                       sorted[static_cast<size_t>(d_ / 2)]);

  Matrix out(d_, L_);
  for (int c = 0; c < d_; ++c) {
    if (chanvar[static_cast<size_t>(c)] < median) continue;  // gated to zero
    double row_mean = 0.0;
    for (int t = 0; t < L_; ++t) row_mean += mean(c, t);
    row_mean /= L_;
    for (int t = 0; t < L_; ++t) out(c, t) = mean(c, t) - row_mean;
  }
  return SaliencyMap(std::move(out), Scale::Raw);
}

void GapCnnModel::save(const std::filesystem::path& path) const {
  ModelFile mf("gapcnn");
  mf.put_u64("d", static_cast<uint64_t>(d_));
  mf.put_u64("L", static_cast<uint64_t>(L_));
  mf.put_u64("classes", static_cast<uint64_t>(classes_));
  mf.put_u64("filters1", static_cast<uint64_t>(f1_));
  mf.put_u64("filters2", static_cast<uint64_t>(f2_));
  mf.put_vec("w1", w1);
  mf.put_vec("b1", b1);
  mf.put_vec("w2", w2);
  mf.put_vec("b2", b2);
  mf.put_mat("dense_w", dense_w);
  mf.put_vec("dense_b", dense_b);
  mf.save(path);
}

GapCnnModel GapCnnModel::load(const std::filesystem::path& path) {
  ModelFile mf = ModelFile::load(path);
  if (mf.type() != "gapcnn") throw DimensionMismatch("expected a gapcnn sidecar, got " + mf.type());
  GapCnnModel m;
  m.d_ = mf.geti("d");
  m.L_ = mf.geti("L");
  m.classes_ = mf.geti("classes");
  m.f1_ = mf.geti("filters1");
  m.f2_ = mf.geti("filters2");
  m.w1 = mf.vec("w1");
  m.b1 = mf.vec("b1");
  m.w2 = mf.vec("w2");
  m.b2 = mf.vec("b2");
  m.dense_w = mf.mat("dense_w");
  m.dense_b = mf.vec("dense_b");
  if (m.w1.size() != static_cast<size_t>(m.f1_) * 9 ||
      m.w2.size() != static_cast<size_t>(m.f2_) * m.f1_ * 9 ||
      m.dense_w.rows() != m.classes_ || m.dense_w.cols() != m.f2_ ||
      m.b1.size() != static_cast<size_t>(m.f1_) || m.b2.size() != static_cast<size_t>(m.f2_) ||
      m.dense_b.size() != static_cast<size_t>(m.classes_))
    throw DimensionMismatch("gapcnn sidecar fields disagree on sizes");
  return m;
}

}  // namespace tsxai
