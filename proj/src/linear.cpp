#include "linear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace tsxai {

namespace {

using ERow = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMapRow = Eigen::Map<const ERow>;

Eigen::MatrixXd pm1_targets(const std::vector<int>& y, int n_classes) {
  Eigen::MatrixXd t(static_cast<Eigen::Index>(y.size()), n_classes);
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    for (int c = 0; c < n_classes; ++c) t(i, c) = y[static_cast<size_t>(i)] == c ? 1.0 : -1.0;
  return t;
}

// Closed-form centered ridge solve; returns p x C weights.  Uses the dual
// formulation when p > n.  alpha > 0 keeps both systems positive definite.
Eigen::MatrixXd solve_centered(const Eigen::MatrixXd& xc, const Eigen::MatrixXd& tc,
                               double alpha) {
  Eigen::Index n = xc.rows(), p = xc.cols();
  Eigen::MatrixXd w;
  if (p <= n) {
    Eigen::MatrixXd g = xc.transpose() * xc;
    g.diagonal().array() += alpha;
    w = g.ldlt().solve(xc.transpose() * tc);
  } else {
    Eigen::MatrixXd k = xc * xc.transpose();
    k.diagonal().array() += alpha;
    w = xc.transpose() * k.ldlt().solve(tc);
  }
  if (!w.allFinite()) throw SingularSystem("ridge solve produced non-finite weights");
  return w;
}

struct CenteredFit {
  Eigen::MatrixXd xc, tc;
  Eigen::VectorXd mu, tbar;
};

CenteredFit center(const Eigen::MatrixXd& x, const Eigen::MatrixXd& t) {
  CenteredFit f;
  f.mu = x.colwise().mean();
  f.tbar = t.colwise().mean();
  f.xc = x.rowwise() - f.mu.transpose();
  f.tc = t.rowwise() - f.tbar.transpose();
  return f;
}

RidgeModel pack_ridge(const CenteredFit& f, const Eigen::MatrixXd& w, double alpha) {
  RidgeModel m;
  m.alpha = alpha;
  m.weights = Matrix(static_cast<int>(w.cols()), static_cast<int>(w.rows()));
  for (int c = 0; c < m.weights.rows(); ++c)
    for (int j = 0; j < m.weights.cols(); ++j) m.weights(c, j) = w(j, c);
  m.intercept.resize(static_cast<size_t>(w.cols()));
  for (int c = 0; c < static_cast<int>(m.intercept.size()); ++c)
    m.intercept[static_cast<size_t>(c)] = f.tbar(c) - f.mu.dot(w.col(c));
  return m;
}

void check_xy(const Matrix& x, const std::vector<int>& y, int n_classes) {
  if (x.rows() < 2) throw DimensionMismatch("need at least 2 rows to fit");
  if (static_cast<size_t>(x.rows()) != y.size())
    throw DimensionMismatch("feature rows and labels disagree");
  if (n_classes < 2) throw DimensionMismatch("need at least 2 classes");
  for (int label : y)
    if (label < 0 || label >= n_classes) throw DimensionMismatch("label outside class range");
  if (!x.all_finite()) throw NonFinite("design matrix contains non-finite values");
}

}  // namespace

RidgeModel ridge_fit(const Matrix& x, const std::vector<int>& y, int n_classes, double alpha) {
  check_xy(x, y, n_classes);
  if (!(alpha > 0.0)) throw DomainError("ridge alpha must be positive");
  EMapRow xm(x.data(), x.rows(), x.cols());
  CenteredFit f = center(xm, pm1_targets(y, n_classes));
  return pack_ridge(f, solve_centered(f.xc, f.tc, alpha), alpha);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i) grid[static_cast<size_t>(i)] = std::pow(10.0, -3.0 + 6.0 * i / 9.0);
  return grid;
}

RidgeModel ridge_fit_cv(const Matrix& x, const std::vector<int>& y, int n_classes,
                        const std::vector<double>& alpha_grid, int folds) {
  check_xy(x, y, n_classes);
  if (folds < 2) throw DomainError("need at least 2 folds");
  if (alpha_grid.empty()) throw DomainError("alpha grid is empty");
  std::vector<double> grid = alpha_grid;
  std::sort(grid.begin(), grid.end());
  for (double a : grid)
    if (!(a > 0.0)) throw DomainError("ridge alpha must be positive");

  int n = x.rows();
  if (n < folds) throw DegenerateFold("fewer rows than folds");
  // Stratified CV needs every class in every validation fold, so each class
  // must populate at least `folds` instances.
  std::vector<int> per_class(static_cast<size_t>(n_classes), 0);
  for (int label : y) ++per_class[static_cast<size_t>(label)];
  for (int c = 0; c < n_classes; ++c)
    if (per_class[static_cast<size_t>(c)] < folds)
      throw DegenerateFold("class " + std::to_string(c) + " has " +
                           std::to_string(per_class[static_cast<size_t>(c)]) +
                           " instances for " + std::to_string(folds) + " folds");

  // Stratified assignment: walk instances grouped by label and deal them
  // round-robin into folds, so each fold sees every class when possible.
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return y[static_cast<size_t>(a)] < y[static_cast<size_t>(b)]; });
  std::vector<int> fold_of(static_cast<size_t>(n));
  for (int pos = 0; pos < n; ++pos) fold_of[static_cast<size_t>(order[static_cast<size_t>(pos)])] = pos % folds;

  // Every fold's training side must still contain every class.
  for (int f = 0; f < folds; ++f) {
    std::vector<int> seen(static_cast<size_t>(n_classes), 0);
    int val_count = 0;
    for (int i = 0; i < n; ++i) {
      if (fold_of[static_cast<size_t>(i)] == f)
        ++val_count;
      else
        seen[static_cast<size_t>(y[static_cast<size_t>(i)])] = 1;
    }
    if (val_count == 0) throw DegenerateFold("fold " + std::to_string(f) + " is empty");
    for (int c = 0; c < n_classes; ++c)
      if (!seen[static_cast<size_t>(c)])
        throw DegenerateFold("fold " + std::to_string(f) + " leaves class " + std::to_string(c) +
                             " out of training");
  }

  EMapRow xm(x.data(), n, x.cols());
  Eigen::MatrixXd targets = pm1_targets(y, n_classes);
  std::vector<double> cv_error(grid.size(), 0.0);

  for (int f = 0; f < folds; ++f) {
    std::vector<int> tr, va;
    for (int i = 0; i < n; ++i) (fold_of[static_cast<size_t>(i)] == f ? va : tr).push_back(i);
    Eigen::MatrixXd xtr(tr.size(), x.cols()), xva(va.size(), x.cols());
    Eigen::MatrixXd ttr(tr.size(), n_classes), tva(va.size(), n_classes);
    for (size_t r = 0; r < tr.size(); ++r) {
      xtr.row(static_cast<Eigen::Index>(r)) = xm.row(tr[r]);
      ttr.row(static_cast<Eigen::Index>(r)) = targets.row(tr[r]);
    }
    for (size_t r = 0; r < va.size(); ++r) {
      xva.row(static_cast<Eigen::Index>(r)) = xm.row(va[r]);
      tva.row(static_cast<Eigen::Index>(r)) = targets.row(va[r]);
    }
    CenteredFit cf = center(xtr, ttr);
    Eigen::MatrixXd xvc = xva.rowwise() - cf.mu.transpose();
    for (size_t gi = 0; gi < grid.size(); ++gi) {
      Eigen::MatrixXd w = solve_centered(cf.xc, cf.tc, grid[gi]);
      Eigen::MatrixXd scores = (xvc * w).rowwise() + cf.tbar.transpose();
      cv_error[gi] += (scores - tva).squaredNorm();
    }
  }

  size_t best = 0;
  for (size_t gi = 1; gi < grid.size(); ++gi)
    if (cv_error[gi] < cv_error[best]) best = gi;

  CenteredFit f = center(xm, targets);
  RidgeModel m = pack_ridge(f, solve_centered(f.xc, f.tc, grid[best]), grid[best]);
  m.alpha_grid = grid;
  m.cv_error = cv_error;
  return m;
}

std::vector<double> ridge_scores(const RidgeModel& m, const double* x, int p) {
  if (p != m.n_features()) throw ShapeMismatch("feature count does not match ridge model");
  std::vector<double> s(static_cast<size_t>(m.n_classes()));
  for (int c = 0; c < m.n_classes(); ++c) {
    double acc = m.intercept[static_cast<size_t>(c)];
    const double* w = m.weights.row(c);
    for (int j = 0; j < p; ++j) acc += w[j] * x[j];
    s[static_cast<size_t>(c)] = acc;
  }
  return s;
}

int ridge_predict(const RidgeModel& m, const double* x, int p) {
  auto s = ridge_scores(m, x, p);
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

SaliencyMap ridge_explanation(const RidgeModel& m, int class_of_interest, int d, int L) {
  if (class_of_interest < 0 || class_of_interest >= m.n_classes())
    throw DomainError("class index out of range");
  if (d < 1 || L < 1) throw DomainError("need positive channel count and length");
  if (m.n_features() != d * L)
    throw ShapeMismatch("model has " + std::to_string(m.n_features()) + " features, not the " +
                        std::to_string(d * L) + " of a " + std::to_string(d) + "x" +
                        std::to_string(L) + " concatenated series");
  Matrix w(d, L);
  const double* src = m.weights.row(class_of_interest);
  std::copy(src, src + static_cast<size_t>(d) * L, w.data());
  return SaliencyMap(std::move(w), Scale::Raw);
}

std::vector<double> softmax(const std::vector<double>& scores) {
  double hi = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - hi);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double stable_gd_lr(const Matrix& x, double l2) {
  EMapRow xm(x.data(), x.rows(), x.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(x.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd w = xm.transpose() * (xm * v) / static_cast<double>(x.rows());
    lambda = w.norm();
    if (lambda == 0.0) break;
    v = w / lambda;
  }
  return 1.0 / (lambda / 2.0 + l2);
}

LogisticModel logistic_fit(const Matrix& x, const std::vector<int>& y, int n_classes,
                           const LogisticConfig& cfg) {
  check_xy(x, y, n_classes);
  if (!(cfg.lr > 0.0) || cfg.l2 < 0.0 || cfg.max_iter < 1)
    throw DomainError("bad logistic config");
  Eigen::Index n = x.rows(), p = x.cols();
  EMapRow xm(x.data(), n, p);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, n_classes);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, y[static_cast<size_t>(i)]) = 1.0;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_classes, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_classes);
  LogisticModel m;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    Eigen::MatrixXd s = xm * w.transpose();
    s.rowwise() += b.transpose();
    Eigen::VectorXd rowmax = s.rowwise().maxCoeff();
    Eigen::MatrixXd prob = (s.colwise() - rowmax).array().exp();
    Eigen::VectorXd denom = prob.rowwise().sum();
    prob.array().colwise() /= denom.array();

    Eigen::MatrixXd diff = (prob - onehot) / static_cast<double>(n);
    Eigen::MatrixXd gw = diff.transpose() * xm + cfg.l2 * w;
    Eigen::VectorXd gb = diff.colwise().sum();
    double gnorm = std::sqrt(gw.squaredNorm() + gb.squaredNorm());
    if (!std::isfinite(gnorm))
      throw NonFinite("logistic gradient diverged; lower the learning rate");
    m.iterations = iter + 1;
    if (gnorm < cfg.tol) {
      m.converged = true;
      break;
    }
    w -= cfg.lr * gw;
    b -= cfg.lr * gb;
  }
  if (!w.allFinite() || !b.allFinite())
    throw NonFinite("logistic weights diverged; lower the learning rate");

  m.weights = Matrix(n_classes, static_cast<int>(p));
  for (int c = 0; c < n_classes; ++c)
    for (int j = 0; j < p; ++j) m.weights(c, j) = w(c, j);
  m.intercept.assign(b.data(), b.data() + n_classes);
  return m;
}

std::vector<double> logistic_proba(const LogisticModel& m, const double* x, int p) {
  if (p != m.n_features()) throw ShapeMismatch("feature count does not match logistic model");
  std::vector<double> s(static_cast<size_t>(m.n_classes()));
  for (int c = 0; c < m.n_classes(); ++c) {
    double acc = m.intercept[static_cast<size_t>(c)];
    const double* w = m.weights.row(c);
    for (int j = 0; j < p; ++j) acc += w[j] * x[j];
    s[static_cast<size_t>(c)] = acc;
  }
  return softmax(s);
}

}  // namespace tsxai
