#include "kpb/svm.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

namespace kpb {

namespace {

constexpr double kCurvatureFloor = 1e-12;

TrainedSVM make_model(const Eigen::VectorXd& lambda, const Eigen::VectorXi& y, double C,
                      const Eigen::VectorXd& grad) {
  TrainedSVM m;
  m.lambda = lambda;
  m.labels_signed = y;
  m.C = C;
  const int n = static_cast<int>(lambda.size());
  for (int i = 0; i < n; ++i)
    if (lambda[i] > 0.0) m.sv_indices.push_back(i);

  // Bias: average of -y_i grad_i over free SVs; midpoint of the KKT
  // interval when no SV is strictly inside the box.
  double sum = 0.0;
  int free_count = 0;
  for (int i = 0; i < n; ++i) {
    if (lambda[i] > 0.0 && lambda[i] < C) {
      sum += -y[i] * grad[i];
      ++free_count;
    }
  }
  if (free_count > 0) {
    m.bias = sum / free_count;
  } else {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double v = -y[i] * grad[i];
      const bool in_up = (y[i] > 0 && lambda[i] < C) || (y[i] < 0 && lambda[i] > 0.0);
      const bool in_low = (y[i] < 0 && lambda[i] < C) || (y[i] > 0 && lambda[i] > 0.0);
      if (in_up) lo = std::max(lo, v);
      if (in_low) hi = std::min(hi, v);
    }
    m.bias = (lo + hi) / 2.0;
  }
  return m;
}

#ifndef NDEBUG
double objective_min_form(const Eigen::VectorXd& lambda, const Eigen::VectorXd& grad) {
  // 1/2 l'Ql - e'l given grad = Ql - e
  return 0.5 * lambda.dot(grad - Eigen::VectorXd::Ones(lambda.size()));
}
#endif

}  // namespace

TrainedSVM solve_dual(const KernelMatrix& K, const Eigen::VectorXi& y, double C,
                      double tol, long max_passes) {
  const int n = K.n();
  if (y.size() != n) throw DataError("solve_dual: label length mismatch");
  if (!(C > 0.0)) throw ConfigError("solve_dual: C must be positive");
  if (!(tol > 0.0)) throw ConfigError("solve_dual: tol must be positive");
  bool has_pos = false, has_neg = false;
  for (int i = 0; i < n; ++i) {
    if (y[i] == 1) has_pos = true;
    else if (y[i] == -1) has_neg = true;
    else throw DataError("solve_dual: labels must be -1 or +1");
  }
  if (!has_pos || !has_neg)
    throw NumericError("solve_dual: infeasible, only one class present");

  if (max_passes <= 0) max_passes = 10L * n;
  const long max_iter = max_passes * static_cast<long>(n);

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q*lambda - e at lambda = 0
  const Eigen::VectorXd yd = y.cast<double>();

#ifndef NDEBUG
  double prev_obj = objective_min_form(lambda, grad);
#endif

  for (long iter = 0; iter < max_iter; ++iter) {
    // maximal violating pair over I_up / I_low
    int i = -1, j = -1;
    double up_best = -std::numeric_limits<double>::infinity();
    double low_best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double v = -yd[t] * grad[t];
      const bool in_up = (y[t] > 0 && lambda[t] < C) || (y[t] < 0 && lambda[t] > 0.0);
      const bool in_low = (y[t] < 0 && lambda[t] < C) || (y[t] > 0 && lambda[t] > 0.0);
      if (in_up && v > up_best) {
        up_best = v;
        i = t;
      }
      if (in_low && v < low_best) {
        low_best = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || up_best - low_best <= tol)
      return make_model(lambda, y, C, grad);

    // two-variable subproblem on (i, j)
    // curvature along the feasible direction, nonnegative for PSD K
    double quad = K.values(i, i) + K.values(j, j) - 2.0 * K.values(i, j);
    if (quad <= 0.0) quad = kCurvatureFloor;

    // Newton step with branch-wise clipping: the clipped variable is set
    // exactly onto its bound and the partner recomputed from the conserved
    // sum/difference, so no sub-ulp residue keeps the pair selectable.
    const double old_i = lambda[i], old_j = lambda[j];
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = old_i - old_j;
      lambda[i] += delta;
      lambda[j] += delta;
      if (diff > 0.0) {
        if (lambda[j] < 0.0) {
          lambda[j] = 0.0;
          lambda[i] = diff;
        }
        if (lambda[i] > C) {
          lambda[i] = C;
          lambda[j] = C - diff;
        }
      } else {
        if (lambda[i] < 0.0) {
          lambda[i] = 0.0;
          lambda[j] = -diff;
        }
        if (lambda[j] > C) {
          lambda[j] = C;
          lambda[i] = C + diff;
        }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = old_i + old_j;
      lambda[i] -= delta;
      lambda[j] += delta;
      if (sum > C) {
        if (lambda[i] > C) {
          lambda[i] = C;
          lambda[j] = sum - C;
        }
        if (lambda[j] > C) {
          lambda[j] = C;
          lambda[i] = sum - C;
        }
      } else {
        if (lambda[j] < 0.0) {
          lambda[j] = 0.0;
          lambda[i] = sum;
        }
        if (lambda[i] < 0.0) {
          lambda[i] = 0.0;
          lambda[j] = sum;
        }
      }
    }
    const double di = lambda[i] - old_i, dj = lambda[j] - old_j;
    grad += (yd[i] * di) * (yd.array() * K.values.col(i).array()).matrix() +
            (yd[j] * dj) * (yd.array() * K.values.col(j).array()).matrix();

#ifndef NDEBUG
    const double obj = objective_min_form(lambda, grad);
    assert(obj <= prev_obj + 1e-9 * (1.0 + std::abs(prev_obj)));
    prev_obj = obj;
#endif
  }

  throw ConvergenceError(
      "solve_dual: no convergence after " + std::to_string(max_passes) + " passes",
      make_model(lambda, y, C, grad));
}

Eigen::VectorXd decision_values(const TrainedSVM& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& K_cols) {
  if (K_cols.rows() != model.lambda.size())
    throw DataError("decision_values: kernel rows do not match training size");
  const Eigen::VectorXd coef =
      model.lambda.array() * model.labels_signed.cast<double>().array();
  return (K_cols.transpose() * coef).array() + model.bias;
}

Eigen::VectorXi predict_labels(const TrainedSVM& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& K_cols) {
  const Eigen::VectorXd f = decision_values(model, K_cols);
  Eigen::VectorXi out(f.size());
  for (int i = 0; i < f.size(); ++i) out[i] = sign_label(f[i]);
  return out;
}

double dual_objective(const TrainedSVM& model, const KernelMatrix& K) {
  const Eigen::VectorXd coef =
      model.lambda.array() * model.labels_signed.cast<double>().array();
  return model.lambda.sum() - 0.5 * coef.dot(K.values * coef);
}

}  // namespace kpb
