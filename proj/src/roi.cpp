#include "kpb/roi.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "kpb/errors.hpp"

namespace kpb {

double class_roi(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXi& y_signed,
                 int class_sign, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("class_roi: theta must be in (0, 1]");
  std::vector<int> members;
  for (int i = 0; i < y_signed.size(); ++i)
    if (y_signed[i] == class_sign) members.push_back(i);
  if (members.size() < 2) {
    std::cerr << "class_roi: class " << (class_sign > 0 ? "+1" : "-1")
              << " has fewer than two points, ROI set to 0\n";
    return 0.0;
  }
  double sum = 0.0;
  for (int i : members) {
    double best = std::numeric_limits<double>::infinity();
    for (int j : members) {
      if (j == i) continue;
      best = std::min(best, (X.row(i) - X.row(j)).squaredNorm());
    }
    sum += std::sqrt(best);
  }
  return theta * sum / static_cast<double>(members.size());
}

std::vector<int> adjust_retention(const std::vector<int>& correct_set,
                                  const std::vector<int>& misclassified_pos,
                                  const std::vector<int>& misclassified_neg,
                                  const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const RoiRadii& radii) {
  const double r_pos2 = radii.roi_pos * radii.roi_pos;
  const double r_neg2 = radii.roi_neg * radii.roi_neg;
  std::vector<int> kept;
  kept.reserve(correct_set.size());
  for (int i : correct_set) {
    bool protected_point = false;
    for (int u : misclassified_pos) {
      if ((X.row(i) - X.row(u)).squaredNorm() <= r_pos2) {
        protected_point = true;
        break;
      }
    }
    if (!protected_point) {
      for (int u : misclassified_neg) {
        if ((X.row(i) - X.row(u)).squaredNorm() <= r_neg2) {
          protected_point = true;
          break;
        }
      }
    }
    if (!protected_point) kept.push_back(i);
  }
  return kept;
}

Ensemble fit_roi_signed(const Eigen::MatrixXd& X, const Eigen::VectorXi& y_signed,
                        const RoiParams& params) {
  const int n = static_cast<int>(X.rows());
  if (y_signed.size() != n) throw DataError("fit_roi: label length mismatch");
  if (params.base.rounds < 1) throw ConfigError("fit_roi: rounds must be >= 1");
  if (!(params.base.step > 0.0)) throw ConfigError("fit_roi: step must be positive");

  RoiRadii radii{class_roi(X, y_signed, +1, params.theta),
                 class_roi(X, y_signed, -1, params.theta)};

  Ensemble ens;
  ens.sigma = params.base.sigma;
  ens.C = params.base.C;
  ens.step = params.base.step;
  ens.roi = RoiInfo{radii.roi_pos, radii.roi_neg, params.theta};

  KernelMatrix K = gram(X, params.base.sigma);
  Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f_prev = Eigen::VectorXd::Zero(n);

  std::vector<double> epsilons, tprs;
  for (int t = 1; t <= params.base.rounds; ++t) {
    RoundRecord rec;
    rec.D_train = transformation_factors({k, t}, f_prev);
    K = perturb(K, rec.D_train);
    ens.perturbation_history.push_back(k);

    try {
      rec.model = solve_dual(K, y_signed, params.base.C);
    } catch (const NumericError& e) {
      throw NumericError("fit_roi: round " + std::to_string(t) + ": " + e.what());
    }

    const Eigen::VectorXd f = decision_values(rec.model, K.values);
    Eigen::VectorXi h(n);
    std::vector<int> correct, mis_pos, mis_neg;
    for (int i = 0; i < n; ++i) {
      h[i] = sign_label(f[i]);
      if (h[i] == y_signed[i]) {
        correct.push_back(i);
      } else if (y_signed[i] > 0) {
        mis_pos.push_back(i);
      } else {
        mis_neg.push_back(i);
      }
    }
    detail::count_rates(y_signed, h, rec.tpr, rec.tnr);
    rec.epsilon = round_error(rec.tpr, rec.tnr);
    rec.alpha = round_weight(rec.epsilon);
    epsilons.push_back(rec.epsilon);
    tprs.push_back(rec.tpr);
    ens.rounds.push_back(std::move(rec));

    // points inside a misclassified point's ROI keep their resolution
    const std::vector<int> reduced = adjust_retention(correct, mis_pos, mis_neg, X, radii);
    std::vector<char> mask(n, 0);
    for (int i : reduced) mask[i] = 1;
    k = update_perturbation(k, mask, params.base.step);
    f_prev = f;
  }

  for (int t : select_rounds(epsilons, tprs)) ens.rounds[t].retained = true;
  return ens;
}

Ensemble fit_roi(const Dataset& train, const RoiParams& params, int positive_class) {
  auto [y, pos] = detail::signed_labels(train, positive_class);
  Ensemble ens = fit_roi_signed(train.features, y, params);
  ens.positive_class = pos;
  return ens;
}

std::vector<int> nearest_training_point(const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                                        const Eigen::Ref<const Eigen::MatrixXd>& X_query) {
  if (X_train.cols() != X_query.cols())
    throw DataError("nearest_training_point: dimension mismatch");
  std::vector<int> nn(X_query.rows());
  for (int j = 0; j < X_query.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int i = 0; i < X_train.rows(); ++i) {
      const double d = (X_train.row(i) - X_query.row(j)).squaredNorm();
      if (d < best) {  // strict: ties stay at the lowest index
        best = d;
        arg = i;
      }
    }
    nn[j] = arg;
  }
  return nn;
}

Prediction predict_roi(const Ensemble& ens, const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                       const Eigen::Ref<const Eigen::MatrixXd>& X_test) {
  if (ens.rounds.empty()) throw NumericError("predict_roi: ensemble has no rounds");
  if (!ens.roi) throw ConfigError("predict_roi: ensemble was not fit with the ROI variant");
  if (X_train.rows() != ens.training_size())
    throw DataError("predict_roi: training set size does not match the ensemble");
  const int m = static_cast<int>(X_test.rows());

  const std::vector<int> nn = nearest_training_point(X_train, X_test);

  Eigen::MatrixXd Kc = gram_cross(X_train, X_test, ens.sigma);
  Eigen::VectorXd f_prev = Eigen::VectorXd::Zero(m);

  Prediction out;
  out.margins = Eigen::VectorXd::Zero(m);
  out.scores = Eigen::VectorXd::Zero(m);
  double alpha_sum = 0.0;
  int retained_count = 0;
  Eigen::VectorXd last_f;

  for (std::size_t t = 0; t < ens.rounds.size(); ++t) {
    const RoundRecord& rec = ens.rounds[t];
    const Eigen::VectorXd& k_t = ens.perturbation_history[t];
    Eigen::VectorXd D_test(m);
    for (int j = 0; j < m; ++j)
      D_test[j] = std::exp(-k_t[nn[j]] * f_prev[j] * f_prev[j]);
    Kc = perturb_cross(Kc, rec.D_train, D_test);

    const Eigen::VectorXd f = decision_values(rec.model, Kc);
    if (rec.retained) {
      for (int j = 0; j < m; ++j) out.margins[j] += rec.alpha * sign_label(f[j]);
      out.scores += rec.alpha * f;
      alpha_sum += rec.alpha;
      ++retained_count;
      last_f = f;
    }
    f_prev = f;
  }
  if (alpha_sum != 0.0) out.scores /= alpha_sum;

  out.labels.resize(m);
  if (retained_count == 1) {
    for (int j = 0; j < m; ++j) out.labels[j] = sign_label(last_f[j]);
  } else {
    for (int j = 0; j < m; ++j) out.labels[j] = sign_label(out.margins[j]);
  }
  return out;
}

}  // namespace kpb
