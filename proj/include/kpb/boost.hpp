#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "kpb/dataset.hpp"
#include "kpb/kernel.hpp"
#include "kpb/svm.hpp"

namespace kpb {

struct BoostParams {
  int rounds = 10;     // T
  double step = 0.01;  // kernel perturbation step
  double sigma = 1.0;  // RBF width
  double C = 100.0;    // SVM regularization
};

struct RoundRecord {
  TrainedSVM model;
  double alpha = 0.0;
  double epsilon = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  Eigen::VectorXd D_train;  // factors applied to the kernel this round
  bool retained = false;
};

// Region-of-influence bookkeeping attached to ensembles fit by the ROI
// variant.
struct RoiInfo {
  double roi_pos = 0.0;
  double roi_neg = 0.0;
  double theta = 0.0;
};

struct Ensemble {
  std::vector<RoundRecord> rounds;
  std::vector<Eigen::VectorXd> perturbation_history;  // k vector used per round
  double sigma = 0.0;
  double C = 0.0;
  double step = 0.0;
  int positive_class = -1;  // original class id mapped to +1
  std::optional<RoiInfo> roi;

  int training_size() const {
    return rounds.empty() ? 0 : static_cast<int>(rounds.front().model.lambda.size());
  }
};

struct Prediction {
  Eigen::VectorXi labels;   // -1 / +1
  Eigen::VectorXd margins;  // sum over retained rounds of alpha_t h_t
  Eigen::VectorXd scores;   // sum over retained rounds of alpha_t f_t / sum alpha_t
};

// k_i += step wherever the point was classified correctly.
Eigen::VectorXd update_perturbation(const Eigen::VectorXd& k,
                                    const std::vector<char>& correct_mask, double step);

// Euclidean distance from (tpr, tnr) to the ideal (1, 1); range [0, sqrt(2)].
double round_error(double tpr, double tnr);

// 0.5 * ln((sqrt(2) - eps) / eps), with eps clamped to
// [1e-12, sqrt(2) - 1e-12] so boundary rounds get large finite weights.
double round_weight(double epsilon);

// Retained rounds: { t : eps_t <= min(eps_1, 1/sqrt(2)) and tpr_t >= tpr_1 },
// relaxed to { t : eps_t <= 1/sqrt(2) and tpr_t >= tpr_1 } when empty, and to
// {1} when still empty. Returned as 0-based indices.
std::vector<int> select_rounds(const std::vector<double>& epsilons,
                               const std::vector<double>& tprs);

// Boosting loop on signed labels.
Ensemble fit_signed(const Eigen::MatrixXd& X, const Eigen::VectorXi& y_signed,
                    const BoostParams& params);

// Two-class dataset wrapper. positive_class < 0 picks the minority class
// (ties to the lower id) as the +1 class.
Ensemble fit(const Dataset& train, const BoostParams& params, int positive_class = -1);

// Testing procedure with unit factors for the query points.
Prediction predict(const Ensemble& ens, const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                   const Eigen::Ref<const Eigen::MatrixXd>& X_test);

inline Prediction predict(const Ensemble& ens, const Dataset& train, const Dataset& test) {
  return predict(ens, train.features, test.features);
}

// Maps signed predictions back to dataset class ids for a binary ensemble.
Eigen::VectorXi to_class_ids(const Ensemble& ens, const Eigen::VectorXi& signed_labels,
                             const Dataset& train);

namespace detail {

// Builds +1/-1 labels for a two-class dataset and resolves the positive
// class id. Shared by the plain and ROI fits.
std::pair<Eigen::VectorXi, int> signed_labels(const Dataset& ds, int positive_class);

void count_rates(const Eigen::VectorXi& y, const Eigen::VectorXi& h, double& tpr,
                 double& tnr);

}  // namespace detail

}  // namespace kpb
