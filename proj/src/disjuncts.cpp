#include "kpb/disjuncts.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iostream>
#include <numeric>

#include "kpb/errors.hpp"

namespace kpb {

namespace {

// Indices of the `count` nearest rows to `from` among `candidates`
// (excluding `from` itself), ordered by (distance, index).
std::vector<int> nearest(const Eigen::MatrixXd& X, int from,
                         const std::vector<int>& candidates, int count) {
  std::vector<std::pair<double, int>> order;
  order.reserve(candidates.size());
  for (int c : candidates) {
    if (c == from) continue;
    order.emplace_back((X.row(c) - X.row(from)).squaredNorm(), c);
  }
  const int take = std::min<int>(count, static_cast<int>(order.size()));
  std::partial_sort(order.begin(), order.begin() + take, order.end());
  std::vector<int> out(take);
  for (int i = 0; i < take; ++i) out[i] = order[i].second;
  return out;
}

}  // namespace

DisjunctPartition find_disjuncts(const Dataset& ds, int kappa, const DisjunctOptions& opts) {
  if (kappa < 1) throw ConfigError("find_disjuncts: kappa must be >= 1");
  const int C = ds.classes();
  const int N = ds.n();

  std::vector<int> all(N);
  std::iota(all.begin(), all.end(), 0);

  DisjunctPartition part;
  part.kappa = kappa;
  part.per_class.resize(C);

  for (int c = 0; c < C; ++c) {
    std::vector<int> members;
    for (int i = 0; i < N; ++i)
      if (ds.labels[i] == c) members.push_back(i);
    if (members.empty()) {
      std::cerr << "find_disjuncts: class " << c << " is empty, skipped\n";
      continue;
    }
    const int nc = static_cast<int>(members.size());
    const int kc = std::min(kappa, nc);

    // out-neighbors, as positions within `members`
    std::vector<int> pos(N, -1);
    for (int p = 0; p < nc; ++p) pos[members[p]] = p;
    std::vector<std::vector<int>> out(nc);
    for (int p = 0; p < nc; ++p) {
      std::vector<int> nbrs;
      if (opts.scope == NeighborScope::WithinClass) {
        nbrs = nearest(ds.features, members[p], members, std::min(kc, nc - 1));
      } else {
        nbrs = nearest(ds.features, members[p], all, kc);
      }
      for (int g : nbrs)
        if (pos[g] >= 0) out[p].push_back(pos[g]);
    }

    std::vector<std::vector<int>> adj;
    if (opts.traversal == TraversalMode::Symmetrized) {
      std::vector<std::vector<int>> sym(nc);
      for (int p = 0; p < nc; ++p)
        for (int q : out[p]) {
          sym[p].push_back(q);
          sym[q].push_back(p);
        }
      for (auto& row : sym) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
      }
      adj = std::move(sym);
    } else {
      adj = std::move(out);
    }

    // BFS from the lowest-index unvisited point
    std::vector<char> seen(nc, 0);
    for (int s = 0; s < nc; ++s) {
      if (seen[s]) continue;
      std::vector<int> comp;
      std::deque<int> queue{s};
      seen[s] = 1;
      while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        comp.push_back(members[u]);
        for (int v : adj[u]) {
          if (!seen[v]) {
            seen[v] = 1;
            queue.push_back(v);
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      part.per_class[c].push_back(std::move(comp));
    }
  }
  return part;
}

KappaDeltaCurve kappa_delta_curve(const Dataset& ds, const DisjunctOptions& opts) {
  if (ds.n() < 2) throw DataError("kappa_delta_curve: need at least 2 points");
  const int kmax = std::max(1, static_cast<int>(std::floor(std::sqrt(ds.n()))));
  KappaDeltaCurve curve;
  for (int kappa = 1; kappa <= kmax; ++kappa)
    curve.points.emplace_back(kappa, find_disjuncts(ds, kappa, opts).delta_total());
  curve.knee = knee_point(curve.points);
  return curve;
}

int knee_point(const std::vector<std::pair<int, int>>& curve) {
  if (curve.size() < 2) return 1;

  const double x0 = curve.front().first, x1 = curve.back().first;
  double ymin = curve.front().second, ymax = curve.front().second;
  for (const auto& [k, d] : curve) {
    ymin = std::min<double>(ymin, d);
    ymax = std::max<double>(ymax, d);
  }
  const double xspan = x1 - x0;
  const double yspan = ymax - ymin;
  if (xspan == 0.0 || yspan == 0.0) return curve.front().first;

  // normalized chord endpoints
  const double ax = 0.0, ay = (curve.front().second - ymin) / yspan;
  const double bx = 1.0, by = (curve.back().second - ymin) / yspan;
  const double len = std::hypot(bx - ax, by - ay);

  int best_kappa = curve.front().first;
  double best = 0.0;
  for (const auto& [k, d] : curve) {
    const double px = (k - x0) / xspan;
    const double py = (d - ymin) / yspan;
    const double dist = std::abs((bx - ax) * (ay - py) - (ax - px) * (by - ay)) / len;
    // rounding on a collinear curve leaves ~1e-16 residues; treat as zero
    if (dist > best + 1e-12) {
      best = dist;
      best_kappa = k;
    }
  }
  return best_kappa;
}

}  // namespace kpb
