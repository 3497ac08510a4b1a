#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here is deliberately written against the math, not against the library
// implementation it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "kpb/dataset.hpp"
#include "kpb/kernel.hpp"
#include "kpb/rng.hpp"
#include "kpb/svm.hpp"

namespace testsupport {

// Deterministic standard normal (Box-Muller on raw mt19937_64 bits);
// std::normal_distribution is implementation-defined.
inline double gaussian(std::mt19937_64& rng) {
  double u1 = kpb::uniform01(rng);
  while (u1 == 0.0) u1 = kpb::uniform01(rng);
  const double u2 = kpb::uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Eigen::MatrixXd gaussian_blob(std::mt19937_64& rng, int n, int dim, double mean,
                                     double stddev) {
  Eigen::MatrixXd X(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) X(i, j) = mean + stddev * gaussian(rng);
  return X;
}

// Imbalanced two-Gaussian problem: majority at the origin, minority offset.
// Returns features and signed labels (+1 = minority).
struct TwoGaussians {
  Eigen::MatrixXd X;
  Eigen::VectorXi y;
};

inline TwoGaussians two_gaussians(std::uint64_t seed, int n_majority, int n_minority,
                                  double offset = 2.0, double minority_std = 0.5) {
  std::mt19937_64 rng(seed);
  TwoGaussians out;
  out.X.resize(n_majority + n_minority, 2);
  out.y.resize(n_majority + n_minority);
  out.X.topRows(n_majority) = gaussian_blob(rng, n_majority, 2, 0.0, 1.0);
  out.X.bottomRows(n_minority) = gaussian_blob(rng, n_minority, 2, offset, minority_std);
  out.y.head(n_majority).setConstant(-1);
  out.y.tail(n_minority).setConstant(1);
  return out;
}

inline kpb::Dataset to_dataset(const TwoGaussians& tg) {
  kpb::Dataset ds;
  ds.features = tg.X;
  ds.labels.resize(tg.y.size());
  int pos = 0, neg = 0;
  for (int i = 0; i < tg.y.size(); ++i) {
    ds.labels[i] = tg.y[i] > 0 ? 1 : 0;
    (tg.y[i] > 0 ? pos : neg)++;
  }
  ds.class_counts = {neg, pos};
  ds.label_names = {"majority", "minority"};
  return ds;
}

// ---------------------------------------------------------------------------
// Projected-gradient oracle for the SVM dual: minimizes
//   1/2 l'Ql - e'l   over  { 0 <= l <= C, y'l = 0 }
// with exact projection onto the feasible set via bisection on the
// hyperplane multiplier. Slow and simple on purpose.

inline Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& v,
                                              const Eigen::VectorXd& y, double C) {
  auto clipped = [&](double theta) -> Eigen::VectorXd {
    Eigen::VectorXd x = v - theta * y;
    return x.cwiseMax(0.0).cwiseMin(C);
  };
  auto residual = [&](double theta) { return y.dot(clipped(theta)); };

  double lo = -(v.cwiseAbs().maxCoeff() + C + 1.0);
  double hi = -lo;
  // residual is nonincreasing in theta
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return clipped(0.5 * (lo + hi));
}

struct OracleResult {
  Eigen::VectorXd lambda;
  double objective;  // maximization form: e'l - 1/2 l'Ql
};

// Spectral (Barzilai-Borwein) step lengths with an exact line search along
// the projected direction; stops when the iterate is a fixed point of the
// fixed-step projection operator, which certifies optimality for this QP.
inline OracleResult dual_oracle(const Eigen::MatrixXd& K, const Eigen::VectorXi& yi,
                                double C) {
  const int n = static_cast<int>(K.rows());
  const Eigen::VectorXd y = yi.cast<double>();
  const Eigen::MatrixXd Q = (y * y.transpose()).cwiseProduct(K);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  const double L = std::max(es.eigenvalues().maxCoeff(), 1e-12);
  const double base_step = 1.0 / L;

  Eigen::VectorXd l = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = -Eigen::VectorXd::Ones(n);
  Eigen::VectorXd l_prev = l, grad_prev = grad;
  double step = base_step;

  for (long it = 0; it < 500000; ++it) {
    const Eigen::VectorXd target = project_box_hyperplane(l - step * grad, y, C);
    const Eigen::VectorXd d = target - l;
    if (it % 10 == 0) {
      // optimality certificate with the conservative fixed step
      const Eigen::VectorXd cert =
          project_box_hyperplane(l - base_step * grad, y, C) - l;
      if (cert.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + C)) break;
    }
    const double slope = grad.dot(d);
    const double curv = d.dot(Q * d);
    double t = 1.0;
    if (curv > 0.0) t = std::min(1.0, std::max(0.0, -slope / curv));
    if (t == 0.0) t = 1.0;

    l_prev = l;
    grad_prev = grad;
    l += t * d;
    grad += Q * (t * d);

    // BB1 step for the next round, kept within sane bounds
    const Eigen::VectorXd s = l - l_prev;
    const Eigen::VectorXd g = grad - grad_prev;
    const double sg = s.dot(g);
    step = sg > 0.0 ? std::min(1e6 * base_step, std::max(1e-6 * base_step, s.dot(s) / sg))
                    : base_step;
  }
  return {l, l.sum() - 0.5 * l.dot(Q * l)};
}

// ---------------------------------------------------------------------------
// Union-find components oracle over an explicit symmetrized edge list.

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

// Components of the symmetrized within-class k-NN graph, computed the dumb
// way: full distance matrix, explicit edge list, union-find. Returns the
// sorted point sets per class.
inline std::vector<std::vector<std::vector<int>>> components_oracle(
    const Eigen::MatrixXd& X, const Eigen::VectorXi& labels, int classes, int kappa) {
  std::vector<std::vector<std::vector<int>>> result(classes);
  for (int c = 0; c < classes; ++c) {
    std::vector<int> members;
    for (int i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);
    const int nc = static_cast<int>(members.size());
    if (nc == 0) continue;
    const int keff = std::min(std::min(kappa, nc), nc - 1);

    UnionFind uf(nc);
    for (int a = 0; a < nc; ++a) {
      std::vector<std::pair<double, int>> order;
      for (int b = 0; b < nc; ++b) {
        if (b == a) continue;
        order.emplace_back((X.row(members[a]) - X.row(members[b])).squaredNorm(), b);
      }
      std::sort(order.begin(), order.end());
      for (int r = 0; r < keff; ++r) uf.unite(a, order[r].second);
    }
    std::vector<std::vector<int>> by_root(nc);
    for (int a = 0; a < nc; ++a) by_root[uf.find(a)].push_back(members[a]);
    for (auto& comp : by_root) {
      if (comp.empty()) continue;
      std::sort(comp.begin(), comp.end());
      result[c].push_back(comp);
    }
    // canonical order: by smallest contained index
    std::sort(result[c].begin(), result[c].end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
  }
  return result;
}

}  // namespace testsupport
