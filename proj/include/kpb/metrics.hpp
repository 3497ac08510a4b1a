#pragma once

#include <Eigen/Dense>
#include <vector>

#include "kpb/disjuncts.hpp"

namespace kpb {

// rows = true class, cols = predicted class, in dataset class-id order.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;

  int classes() const { return static_cast<int>(counts.rows()); }
  int total() const { return counts.sum(); }
};

ConfusionMatrix confusion(const Eigen::VectorXi& y_true, const Eigen::VectorXi& y_pred,
                          int classes);

// recall_c = counts(c, c) / row_sum(c) for every class.
std::vector<double> per_class_recall(const ConfusionMatrix& conf);

// Geometric mean of per-class recalls. Zero as soon as any class is fully
// misclassified; throws if a class has no true points.
double gmean(const ConfusionMatrix& conf);

// Two classes: (1 + tpr - fpr) / 2. More classes: mean over unordered class
// pairs of the two-class formula on the rows restricted to those true
// classes (prediction of a third class counts as a miss).
double auc(const ConfusionMatrix& conf);

// Geometric Small Disjunct Index. `eval_indices` are dataset point indices
// with a prediction, `correct` the matching outcome flags. Weights are
// exp(-(size - min size)) per class, algebraically identical to exp(-size)
// after normalization but immune to underflow.
double gsdi(const DisjunctPartition& partition, const std::vector<int>& eval_indices,
            const std::vector<char>& correct);

// H x C matrix of per-classifier per-class accuracies.
using ClassAccuracyTable = Eigen::MatrixXd;

// mu(h) = sum_c (acc_{c,h} - min_c) / (max_c - min_c); a class where all
// classifiers tie contributes 0 to everyone.
std::vector<double> mu_scores(const ClassAccuracyTable& table);

// argmax of mu_scores, ties to the lowest index.
int select_best(const ClassAccuracyTable& table);

}  // namespace kpb
