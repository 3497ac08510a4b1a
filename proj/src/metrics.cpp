#include "kpb/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "kpb/errors.hpp"

namespace kpb {

ConfusionMatrix confusion(const Eigen::VectorXi& y_true, const Eigen::VectorXi& y_pred,
                          int classes) {
  if (y_true.size() != y_pred.size()) throw DataError("confusion: length mismatch");
  ConfusionMatrix conf;
  conf.counts = Eigen::MatrixXi::Zero(classes, classes);
  for (int i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= classes || y_pred[i] < 0 || y_pred[i] >= classes)
      throw DataError("confusion: label out of range");
    ++conf.counts(y_true[i], y_pred[i]);
  }
  return conf;
}

std::vector<double> per_class_recall(const ConfusionMatrix& conf) {
  std::vector<double> recall(conf.classes());
  for (int c = 0; c < conf.classes(); ++c) {
    const int row = conf.counts.row(c).sum();
    if (row == 0) throw DataError("recall undefined: class " + std::to_string(c) +
                                  " has no true points");
    recall[c] = static_cast<double>(conf.counts(c, c)) / row;
  }
  return recall;
}

double gmean(const ConfusionMatrix& conf) {
  const auto recall = per_class_recall(conf);
  double prod = 1.0;
  for (double r : recall) prod *= r;
  return std::pow(prod, 1.0 / conf.classes());
}

double auc(const ConfusionMatrix& conf) {
  const int C = conf.classes();
  std::vector<int> present;
  for (int c = 0; c < C; ++c)
    if (conf.counts.row(c).sum() > 0) present.push_back(c);
  if (present.size() < 2) throw DataError("auc undefined: fewer than two classes present");

  double sum = 0.0;
  int pairs = 0;
  for (std::size_t a = 0; a < present.size(); ++a) {
    for (std::size_t b = a + 1; b < present.size(); ++b) {
      const int ca = present[a], cb = present[b];
      const double tpr =
          static_cast<double>(conf.counts(ca, ca)) / conf.counts.row(ca).sum();
      const double tnr =
          static_cast<double>(conf.counts(cb, cb)) / conf.counts.row(cb).sum();
      sum += (1.0 + tpr - (1.0 - tnr)) / 2.0;
      ++pairs;
    }
  }
  return sum / pairs;
}

double gsdi(const DisjunctPartition& partition, const std::vector<int>& eval_indices,
            const std::vector<char>& correct) {
  if (eval_indices.size() != correct.size()) throw DataError("gsdi: length mismatch");

  // dataset index -> (class, disjunct)
  int max_index = -1;
  for (const auto& cls : partition.per_class)
    for (const auto& dj : cls)
      for (int i : dj) max_index = std::max(max_index, i);
  std::vector<std::pair<int, int>> where(max_index + 1, {-1, -1});
  for (std::size_t c = 0; c < partition.per_class.size(); ++c)
    for (std::size_t d = 0; d < partition.per_class[c].size(); ++d)
      for (int i : partition.per_class[c][d])
        where[i] = {static_cast<int>(c), static_cast<int>(d)};

  // per-disjunct evaluated/correct counts
  std::vector<std::vector<std::pair<int, int>>> tally(partition.per_class.size());
  for (std::size_t c = 0; c < tally.size(); ++c)
    tally[c].assign(partition.per_class[c].size(), {0, 0});
  for (std::size_t e = 0; e < eval_indices.size(); ++e) {
    const int i = eval_indices[e];
    if (i < 0 || i > max_index || where[i].first < 0)
      throw DataError("gsdi: evaluated point " + std::to_string(i) +
                      " is not in any disjunct");
    auto& [m, m_ok] = tally[where[i].first][where[i].second];
    ++m;
    if (correct[e]) ++m_ok;
  }

  double prod = 1.0;
  int used_classes = 0;
  for (std::size_t c = 0; c < tally.size(); ++c) {
    if (partition.per_class[c].empty()) continue;
    ++used_classes;
    // shift sizes by the class minimum over disjuncts that hold evaluated
    // points; cancels in the quotient but keeps exp() in range
    int min_size = -1;
    for (std::size_t d = 0; d < tally[c].size(); ++d) {
      if (tally[c][d].first == 0) continue;
      const int size = static_cast<int>(partition.per_class[c][d].size());
      if (min_size < 0 || size < min_size) min_size = size;
    }
    if (min_size < 0)
      throw DataError("gsdi undefined: class " + std::to_string(c) +
                      " has no evaluated points");
    double num = 0.0, den = 0.0;
    for (std::size_t d = 0; d < tally[c].size(); ++d) {
      const auto [m, m_ok] = tally[c][d];
      if (m == 0) continue;
      const double w =
          std::exp(-static_cast<double>(partition.per_class[c][d].size() - min_size));
      num += w * (static_cast<double>(m_ok) / m);
      den += w;
    }
    prod *= num / den;
  }
  if (used_classes == 0) throw DataError("gsdi undefined: empty partition");
  return std::pow(prod, 1.0 / used_classes);
}

std::vector<double> mu_scores(const ClassAccuracyTable& table) {
  const int H = static_cast<int>(table.rows());
  const int C = static_cast<int>(table.cols());
  if (H < 2) throw DataError("mu_scores: need at least two classifiers");

  std::vector<double> mu(H, 0.0);
  for (int c = 0; c < C; ++c) {
    const double lo = table.col(c).minCoeff();
    const double hi = table.col(c).maxCoeff();
    if (hi == lo) continue;  // degenerate class contributes 0 to everyone
    for (int h = 0; h < H; ++h) mu[h] += (table(h, c) - lo) / (hi - lo);
  }
  return mu;
}

int select_best(const ClassAccuracyTable& table) {
  const auto mu = mu_scores(table);
  int best = 0;
  for (std::size_t h = 1; h < mu.size(); ++h)
    if (mu[h] > mu[best]) best = static_cast<int>(h);
  return best;
}

}  // namespace kpb
