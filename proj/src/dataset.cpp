#include "kpb/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "kpb/errors.hpp"
#include "kpb/rng.hpp"

namespace kpb {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

void Dataset::validate() const {
  if (labels.size() != features.rows())
    throw DataError("dataset: label count does not match row count");
  const int C = classes();
  std::vector<int> counted(C, 0);
  for (int i = 0; i < n(); ++i) {
    if (labels[i] < 0 || labels[i] >= C) throw DataError("dataset: label id out of range");
    ++counted[labels[i]];
  }
  for (int c = 0; c < C; ++c) {
    if (class_counts[c] < 1) throw DataError("dataset: empty class " + std::to_string(c));
    if (counted[c] != class_counts[c]) throw DataError("dataset: class_counts inconsistent");
  }
  if (!features.allFinite()) throw DataError("dataset: non-finite feature value");
}

Dataset load_csv(const std::string& path, int label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
    if (rows.size() > 1 && rows.back().size() != rows.front().size())
      throw DataError("malformed row at line " + std::to_string(lineno) + ": expected " +
                      std::to_string(rows.front().size()) + " cells, got " +
                      std::to_string(rows.back().size()));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  const int arity = static_cast<int>(rows.front().size());
  if (label_column < 0 || label_column >= arity)
    throw ConfigError("label column " + std::to_string(label_column) + " out of range for arity " +
                      std::to_string(arity));

  // Header detection: a non-numeric cell in any feature column of row 0.
  bool header = false;
  for (int j = 0; j < arity && !header; ++j) {
    double tmp;
    if (j != label_column && !parse_double(rows.front()[j], tmp)) header = true;
  }
  const std::size_t first_data = header ? 1 : 0;
  if (first_data >= rows.size()) throw DataError(path + ": header but no data rows");

  const int n = static_cast<int>(rows.size() - first_data);
  const int d = arity - 1;

  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  std::map<std::string, int> encoding;

  for (int i = 0; i < n; ++i) {
    const auto& row = rows[first_data + i];
    int col = 0;
    for (int j = 0; j < arity; ++j) {
      if (j == label_column) continue;
      double v;
      if (!parse_double(row[j], v))
        throw DataError("malformed row at line " + std::to_string(first_data + i + 1) +
                        ": cell '" + row[j] + "' is not numeric");
      ds.features(i, col++) = v;
    }
    const std::string& tok = row[label_column];
    auto it = encoding.find(tok);
    if (it == encoding.end()) {
      it = encoding.emplace(tok, static_cast<int>(ds.label_names.size())).first;
      ds.label_names.push_back(tok);
    }
    ds.labels[i] = it->second;
  }

  ds.class_counts.assign(ds.label_names.size(), 0);
  for (int i = 0; i < n; ++i) ++ds.class_counts[ds.labels[i]];
  if (ds.classes() < 2) throw DataError(path + ": degenerate dataset, single class present");
  if (!ds.features.allFinite()) throw DataError(path + ": non-finite feature value");
  return ds;
}

FeatureStats feature_stats(const Dataset& train) {
  if (train.n() == 0) throw DataError("feature_stats: empty training set");
  FeatureStats s;
  s.mean = train.features.colwise().mean();
  Eigen::MatrixXd centered = train.features.rowwise() - s.mean.transpose();
  // population convention: divide by n
  s.stddev = (centered.array().square().colwise().sum() / train.n()).sqrt();
  return s;
}

Dataset apply_stats(const Dataset& ds, const FeatureStats& stats) {
  if (stats.mean.size() != ds.dim()) throw DataError("apply_stats: dimension mismatch");
  Dataset out = ds;
  for (int j = 0; j < ds.dim(); ++j) {
    if (stats.stddev[j] == 0.0) {
      out.features.col(j).setZero();
    } else {
      out.features.col(j) = (ds.features.col(j).array() - stats.mean[j]) / stats.stddev[j];
    }
  }
  return out;
}

std::pair<Dataset, Dataset> normalize(const Dataset& train, const Dataset& apply_to) {
  const FeatureStats s = feature_stats(train);
  return {apply_stats(train, s), apply_stats(apply_to, s)};
}

FoldPlan stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
  for (int c = 0; c < ds.classes(); ++c) {
    if (ds.class_counts[c] < k)
      throw DataError("stratified_kfold: class '" + ds.label_names[c] + "' has " +
                      std::to_string(ds.class_counts[c]) + " points, fewer than k=" +
                      std::to_string(k));
  }

  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> test_sets(k);
  for (int c = 0; c < ds.classes(); ++c) {
    std::vector<int> idx;
    for (int i = 0; i < ds.n(); ++i)
      if (ds.labels[i] == c) idx.push_back(i);
    shuffle(idx, rng);
    // deal round-robin so per-fold class counts differ by at most one
    for (std::size_t p = 0; p < idx.size(); ++p) test_sets[p % k].push_back(idx[p]);
  }

  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(k);
  for (int f = 0; f < k; ++f) {
    std::sort(test_sets[f].begin(), test_sets[f].end());
    plan.folds[f].test = test_sets[f];
    auto& train = plan.folds[f].train;
    std::size_t t = 0;
    for (int i = 0; i < ds.n(); ++i) {
      if (t < test_sets[f].size() && test_sets[f][t] == i) {
        ++t;
      } else {
        train.push_back(i);
      }
    }
  }
  return plan;
}

Dataset subsample_preserving_imbalance(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("subsample: fraction must be in (0, 1]");
  std::mt19937_64 rng(seed);
  std::vector<int> keep;
  for (int c = 0; c < ds.classes(); ++c) {
    const int target = static_cast<int>(std::lround(fraction * ds.class_counts[c]));
    if (target < 1)
      throw DataError("subsample: class '" + ds.label_names[c] + "' would have 0 points");
    std::vector<int> idx;
    for (int i = 0; i < ds.n(); ++i)
      if (ds.labels[i] == c) idx.push_back(i);
    shuffle(idx, rng);
    keep.insert(keep.end(), idx.begin(), idx.begin() + target);
  }
  return slice(ds, keep);
}

Dataset slice(const Dataset& ds, const std::vector<int>& indices) {
  Dataset out;
  out.features.resize(static_cast<int>(indices.size()), ds.dim());
  out.labels.resize(static_cast<int>(indices.size()));
  out.label_names = ds.label_names;
  out.class_counts.assign(ds.classes(), 0);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int i = indices[r];
    if (i < 0 || i >= ds.n()) throw DataError("slice: index out of range");
    out.features.row(static_cast<int>(r)) = ds.features.row(i);
    out.labels[static_cast<int>(r)] = ds.labels[i];
    ++out.class_counts[ds.labels[i]];
  }
  return out;
}

std::string foldplan_to_text(const FoldPlan& plan) {
  std::ostringstream os;
  os << "folds " << plan.folds.size() << " seed " << plan.seed << "\n";
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    os << "fold " << f << " test";
    for (int i : plan.folds[f].test) os << ' ' << i;
    os << "\n";
  }
  return os.str();
}

double imbalance_ratio(const Dataset& ds) {
  auto [lo, hi] = std::minmax_element(ds.class_counts.begin(), ds.class_counts.end());
  return static_cast<double>(*hi) / static_cast<double>(*lo);
}

}  // namespace kpb
