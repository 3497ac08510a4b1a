#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kpb/errors.hpp"
#include "kpb/kernel.hpp"

namespace kpb {

// Soft-margin SVM in dual form over a precomputed kernel.
struct TrainedSVM {
  Eigen::VectorXd lambda;         // dual coefficients, 0 <= lambda_i <= C
  double bias = 0.0;
  std::vector<int> sv_indices;    // { i : lambda_i > 0 }
  Eigen::VectorXi labels_signed;  // training labels in {-1, +1}
  double C = 0.0;
};

// Thrown when the working-set loop hits the sweep limit; carries the best
// iterate so far.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& msg, TrainedSVM best_iterate)
      : NumericError(msg), best(std::move(best_iterate)) {}
  TrainedSVM best;
};

// Maximizes sum(l) - 1/2 l'(yy'.*K)l subject to 0 <= l <= C, sum(l_i y_i) = 0,
// by two-variable decomposition with maximal-KKT-violating-pair selection
// (ties broken by lowest index). Bias from free support vectors when any
// exist, midpoint rule otherwise. One "pass" is n working-set updates;
// max_passes <= 0 selects the default of 10 * n passes.
TrainedSVM solve_dual(const KernelMatrix& K, const Eigen::VectorXi& y, double C,
                      double tol = 1e-3, long max_passes = -1);

// f_j = sum_i lambda_i y_i K(i, j) + b for each column j of K_cols.
Eigen::VectorXd decision_values(const TrainedSVM& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& K_cols);

// sign of the decision value; exactly 0 maps to +1.
Eigen::VectorXi predict_labels(const TrainedSVM& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& K_cols);

inline int sign_label(double f) { return f >= 0.0 ? 1 : -1; }

// Value of the dual objective sum(l) - 1/2 l'(yy'.*K)l at the model's lambda.
double dual_objective(const TrainedSVM& model, const KernelMatrix& K);

}  // namespace kpb
