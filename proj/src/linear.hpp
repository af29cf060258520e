#pragma once

#include <vector>

#include "matrix.hpp"
#include "tsdata.hpp"

namespace tsxai {

// One-vs-rest ridge regression on +/-1 targets, solved in closed form.
// Features and targets are centered during the fit; the intercept absorbs
// the means.  When p > n the dual (n x n) system is solved instead, which
// gives the same weights at a fraction of the cost.
struct RidgeModel {
  Matrix weights;                  // n_classes x p
  std::vector<double> intercept;   // n_classes
  double alpha = 1.0;
  std::vector<double> alpha_grid;  // empty for fixed-alpha fits
  std::vector<double> cv_error;    // total CV squared error per grid entry
  int n_classes() const { return weights.rows(); }
  int n_features() const { return weights.cols(); }
};

RidgeModel ridge_fit(const Matrix& x, const std::vector<int>& y, int n_classes, double alpha);

// 10 log-spaced values covering 1e-3 .. 1e3.
std::vector<double> default_alpha_grid();

// Stratified k-fold CV over the alpha grid, scored by squared error of the
// real-valued scores against +/-1 targets; ties prefer the smaller alpha.
// Throws DegenerateFold when a class has fewer members than folds, since no
// stratification can then cover every fold.
RidgeModel ridge_fit_cv(const Matrix& x, const std::vector<int>& y, int n_classes,
                        const std::vector<double>& alpha_grid = default_alpha_grid(),
                        int folds = 5);

std::vector<double> ridge_scores(const RidgeModel& m, const double* x, int p);
int ridge_predict(const RidgeModel& m, const double* x, int p);

// The class-of-interest weight row reshaped to d x L.  Only meaningful when
// the model was trained on concatenated raw values, hence the shape check.
SaliencyMap ridge_explanation(const RidgeModel& m, int class_of_interest, int d, int L);

// Multinomial logistic regression trained by plain gradient descent on the
// mean cross-entropy plus an L2 term.  Stops when the gradient norm drops
// below tol or max_iter is reached.
struct LogisticConfig {
  int max_iter = 1000;
  double lr = 1e-2;
  double l2 = 1e-4;
  double tol = 1e-6;
};

struct LogisticModel {
  Matrix weights;  // n_classes x p
  std::vector<double> intercept;
  int iterations = 0;
  bool converged = false;
  int n_classes() const { return weights.rows(); }
  int n_features() const { return weights.cols(); }
};

LogisticModel logistic_fit(const Matrix& x, const std::vector<int>& y, int n_classes,
                           const LogisticConfig& cfg = {});

std::vector<double> logistic_proba(const LogisticModel& m, const double* x, int p);

// Step size that keeps plain GD stable on this design matrix: the inverse of
// a power-iteration bound on the softmax Hessian, lambda_max(X^T X) / (2n) + l2.
double stable_gd_lr(const Matrix& x, double l2);

// Numerically safe softmax (max subtracted, normalized to sum 1).
std::vector<double> softmax(const std::vector<double>& scores);

}  // namespace tsxai
