#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kpb {

// A dataset with dense class ids 0..C-1. Immutable after construction;
// all operations below return new datasets.
struct Dataset {
  Eigen::MatrixXd features;               // n x d
  Eigen::VectorXi labels;                 // n, values in [0, C)
  std::vector<int> class_counts;          // size C
  std::vector<std::string> label_names;   // id -> original label token

  int n() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  int classes() const { return static_cast<int>(class_counts.size()); }

  // Throws DataError if the structural invariants do not hold.
  void validate() const;
};

struct FoldPlan {
  struct Fold {
    std::vector<int> train;
    std::vector<int> test;
  };
  std::vector<Fold> folds;
  std::uint64_t seed = 0;
};

// Per-feature mean and population standard deviation.
struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // 0 marks a constant feature
};

// Loads a comma-separated file. The label column is treated as categorical
// and re-encoded densely in order of first appearance. A header row is
// auto-detected: any non-numeric cell in a feature column of the first row.
Dataset load_csv(const std::string& path, int label_column);

FeatureStats feature_stats(const Dataset& train);

// (x - mean) / std per feature; constant features map to 0.
Dataset apply_stats(const Dataset& ds, const FeatureStats& stats);

// Statistics from `train`, applied to both sets.
std::pair<Dataset, Dataset> normalize(const Dataset& train, const Dataset& apply_to);

// Deterministic stratified k-fold split. Every class needs >= k points.
FoldPlan stratified_kfold(const Dataset& ds, int k, std::uint64_t seed);

// Per-class subsample without replacement to round(fraction * count).
Dataset subsample_preserving_imbalance(const Dataset& ds, double fraction, std::uint64_t seed);

// Row subset, preserving order of `indices`. Class counts are recomputed;
// the label encoding (ids and names) is kept as-is.
Dataset slice(const Dataset& ds, const std::vector<int>& indices);

// Plain-text index listing, for reproducibility audits.
std::string foldplan_to_text(const FoldPlan& plan);

// Largest class count divided by smallest.
double imbalance_ratio(const Dataset& ds);

}  // namespace kpb
