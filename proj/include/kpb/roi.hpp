#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kpb/boost.hpp"
#include "kpb/dataset.hpp"

namespace kpb {

struct RoiParams {
  BoostParams base;
  double theta = 0.6;  // ROI scaling parameter, in (0, 1]
};

struct RoiRadii {
  double roi_pos = 0.0;
  double roi_neg = 0.0;
};

// theta times the class's mean nearest-same-class-neighbor distance.
// A class with fewer than two points gets radius 0 (with a warning) so that
// tiny-minority folds still run.
double class_roi(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXi& y_signed,
                 int class_sign, double theta);

inline double class_roi(const Dataset& train, int class_sign, double theta,
                        int positive_class = -1) {
  auto [y, pos] = detail::signed_labels(train, positive_class);
  return class_roi(train.features, y, class_sign, theta);
}

// Removes from the correct set every point within (closed ball) roi_pos of a
// misclassified positive point or roi_neg of a misclassified negative point.
std::vector<int> adjust_retention(const std::vector<int>& correct_set,
                                  const std::vector<int>& misclassified_pos,
                                  const std::vector<int>& misclassified_neg,
                                  const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const RoiRadii& radii);

Ensemble fit_roi_signed(const Eigen::MatrixXd& X, const Eigen::VectorXi& y_signed,
                        const RoiParams& params);

Ensemble fit_roi(const Dataset& train, const RoiParams& params, int positive_class = -1);

// Testing procedure of the ROI variant: each query borrows the perturbation
// parameter of its nearest training point (ties to the lowest index) and
// carries its own decision-value history.
Prediction predict_roi(const Ensemble& ens, const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                       const Eigen::Ref<const Eigen::MatrixXd>& X_test);

inline Prediction predict_roi(const Ensemble& ens, const Dataset& train,
                              const Dataset& test) {
  return predict_roi(ens, train.features, test.features);
}

// Index of the nearest row of X_train for every row of X_query.
std::vector<int> nearest_training_point(const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                                        const Eigen::Ref<const Eigen::MatrixXd>& X_query);

}  // namespace kpb
