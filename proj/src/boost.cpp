#include "kpb/boost.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kpb/errors.hpp"

namespace kpb {

namespace {

constexpr double kEpsClamp = 1e-12;

}  // namespace

Eigen::VectorXd update_perturbation(const Eigen::VectorXd& k,
                                    const std::vector<char>& correct_mask, double step) {
  if (static_cast<std::size_t>(k.size()) != correct_mask.size())
    throw DataError("update_perturbation: length mismatch");
  if (!(step > 0.0)) throw ConfigError("update_perturbation: step must be positive");
  Eigen::VectorXd out = k;
  for (int i = 0; i < k.size(); ++i)
    if (correct_mask[i]) out[i] += step;
  return out;
}

double round_error(double tpr, double tnr) {
  return std::hypot(1.0 - tpr, 1.0 - tnr);
}

double round_weight(double epsilon) {
  const double sqrt2 = std::sqrt(2.0);
  const double eps = std::min(std::max(epsilon, kEpsClamp), sqrt2 - kEpsClamp);
  return 0.5 * std::log((sqrt2 - eps) / eps);
}

std::vector<int> select_rounds(const std::vector<double>& epsilons,
                               const std::vector<double>& tprs) {
  if (epsilons.empty() || epsilons.size() != tprs.size())
    throw DataError("select_rounds: bad input lengths");
  const double half = 1.0 / std::sqrt(2.0);
  const double gate = std::min(epsilons.front(), half);

  std::vector<int> kept;
  for (std::size_t t = 0; t < epsilons.size(); ++t)
    if (epsilons[t] <= gate && tprs[t] >= tprs.front()) kept.push_back(static_cast<int>(t));
  if (kept.empty()) {
    for (std::size_t t = 0; t < epsilons.size(); ++t)
      if (epsilons[t] <= half && tprs[t] >= tprs.front()) kept.push_back(static_cast<int>(t));
  }
  if (kept.empty()) kept.push_back(0);  // the relaxed set can still miss
                                        // round 1; fall back to it
  return kept;
}

namespace detail {

std::pair<Eigen::VectorXi, int> signed_labels(const Dataset& ds, int positive_class) {
  std::vector<int> present;
  for (int c = 0; c < ds.classes(); ++c)
    if (ds.class_counts[c] > 0) present.push_back(c);
  if (present.size() != 2)
    throw DataError("binary fit: dataset must contain exactly two classes, got " +
                    std::to_string(present.size()));

  int pos = positive_class;
  if (pos < 0) {
    // minority is the positive (tpr) class; ties to the lower id
    pos = ds.class_counts[present[0]] <= ds.class_counts[present[1]] ? present[0]
                                                                     : present[1];
  } else if (pos != present[0] && pos != present[1]) {
    throw ConfigError("binary fit: positive class " + std::to_string(pos) +
                      " not present");
  }
  Eigen::VectorXi y(ds.n());
  for (int i = 0; i < ds.n(); ++i) y[i] = ds.labels[i] == pos ? 1 : -1;
  return {y, pos};
}

void count_rates(const Eigen::VectorXi& y, const Eigen::VectorXi& h, double& tpr,
                 double& tnr) {
  int tp = 0, fn = 0, tn = 0, fp = 0;
  for (int i = 0; i < y.size(); ++i) {
    if (y[i] > 0) {
      (h[i] > 0 ? tp : fn)++;
    } else {
      (h[i] < 0 ? tn : fp)++;
    }
  }
  tpr = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  tnr = tn + fp > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
}

}  // namespace detail

Ensemble fit_signed(const Eigen::MatrixXd& X, const Eigen::VectorXi& y_signed,
                    const BoostParams& params) {
  const int n = static_cast<int>(X.rows());
  if (y_signed.size() != n) throw DataError("fit: label length mismatch");
  if (params.rounds < 1) throw ConfigError("fit: rounds must be >= 1");
  if (!(params.step > 0.0)) throw ConfigError("fit: step must be positive");

  Ensemble ens;
  ens.sigma = params.sigma;
  ens.C = params.C;
  ens.step = params.step;

  KernelMatrix K = gram(X, params.sigma);
  Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f_prev = Eigen::VectorXd::Zero(n);

  std::vector<double> epsilons, tprs;
  for (int t = 1; t <= params.rounds; ++t) {
    RoundRecord rec;
    rec.D_train = transformation_factors({k, t}, f_prev);
    K = perturb(K, rec.D_train);
    ens.perturbation_history.push_back(k);

    try {
      rec.model = solve_dual(K, y_signed, params.C);
    } catch (const NumericError& e) {
      throw NumericError("fit: round " + std::to_string(t) + ": " + e.what());
    }

    const Eigen::VectorXd f = decision_values(rec.model, K.values);
    Eigen::VectorXi h(n);
    std::vector<char> correct(n);
    for (int i = 0; i < n; ++i) {
      h[i] = sign_label(f[i]);
      correct[i] = h[i] == y_signed[i];
    }
    detail::count_rates(y_signed, h, rec.tpr, rec.tnr);
    rec.epsilon = round_error(rec.tpr, rec.tnr);
    rec.alpha = round_weight(rec.epsilon);
    epsilons.push_back(rec.epsilon);
    tprs.push_back(rec.tpr);
    ens.rounds.push_back(std::move(rec));

    k = update_perturbation(k, correct, params.step);
    f_prev = f;
  }

  for (int t : select_rounds(epsilons, tprs)) ens.rounds[t].retained = true;
  return ens;
}

Ensemble fit(const Dataset& train, const BoostParams& params, int positive_class) {
  auto [y, pos] = detail::signed_labels(train, positive_class);
  Ensemble ens = fit_signed(train.features, y, params);
  ens.positive_class = pos;
  return ens;
}

Prediction predict(const Ensemble& ens, const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                   const Eigen::Ref<const Eigen::MatrixXd>& X_test) {
  if (ens.rounds.empty()) throw NumericError("predict: ensemble has no rounds");
  if (X_train.rows() != ens.training_size())
    throw DataError("predict: training set size does not match the ensemble");
  const int m = static_cast<int>(X_test.rows());

  Eigen::MatrixXd Kc = gram_cross(X_train, X_test, ens.sigma);
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(m);

  Prediction out;
  out.margins = Eigen::VectorXd::Zero(m);
  out.scores = Eigen::VectorXd::Zero(m);
  double alpha_sum = 0.0;
  int retained_count = 0;
  Eigen::VectorXd last_f;

  for (const RoundRecord& rec : ens.rounds) {
    Kc = perturb_cross(Kc, rec.D_train, unit);
    if (!rec.retained) continue;
    const Eigen::VectorXd f = decision_values(rec.model, Kc);
    for (int j = 0; j < m; ++j) out.margins[j] += rec.alpha * sign_label(f[j]);
    out.scores += rec.alpha * f;
    alpha_sum += rec.alpha;
    ++retained_count;
    last_f = f;
  }
  if (alpha_sum != 0.0) out.scores /= alpha_sum;

  out.labels.resize(m);
  if (retained_count == 1) {
    // a lone retained round predicts directly; its weight can be <= 0 when
    // the set fell back to round 1, and sign(alpha * h) would invert it
    for (int j = 0; j < m; ++j) out.labels[j] = sign_label(last_f[j]);
  } else {
    for (int j = 0; j < m; ++j) out.labels[j] = sign_label(out.margins[j]);
  }
  return out;
}

Eigen::VectorXi to_class_ids(const Ensemble& ens, const Eigen::VectorXi& signed_labels,
                             const Dataset& train) {
  int negative = -1;
  for (int c = 0; c < train.classes(); ++c)
    if (c != ens.positive_class && train.class_counts[c] > 0) negative = c;
  Eigen::VectorXi out(signed_labels.size());
  for (int i = 0; i < signed_labels.size(); ++i)
    out[i] = signed_labels[i] > 0 ? ens.positive_class : negative;
  return out;
}

}  // namespace kpb
