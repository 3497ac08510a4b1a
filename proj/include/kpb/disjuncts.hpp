#pragma once

#include <utility>
#include <vector>

#include "kpb/dataset.hpp"

namespace kpb {

// Where a point's candidate neighbors come from: its own class's k-NN, or
// the global k-NN filtered down to the class afterwards.
enum class NeighborScope { WithinClass, GlobalFiltered };

// How components are traversed. Symmetrized is order-independent (edge iff
// either endpoint lists the other). Directed follows raw out-edges with BFS
// in ascending index order, which reproduces the published counts but makes
// the partition depend on that order.
enum class TraversalMode { Symmetrized, Directed };

struct DisjunctOptions {
  NeighborScope scope = NeighborScope::WithinClass;
  TraversalMode traversal = TraversalMode::Symmetrized;
};

// Per-class list of disjuncts; each disjunct is a sorted list of dataset
// point indices. Within a class the disjuncts partition that class.
struct DisjunctPartition {
  std::vector<std::vector<std::vector<int>>> per_class;
  int kappa = 0;

  int delta_total() const {
    int d = 0;
    for (const auto& c : per_class) d += static_cast<int>(c.size());
    return d;
  }
};

struct KappaDeltaCurve {
  std::vector<std::pair<int, int>> points;  // (kappa, delta), kappa ascending
  int knee = 1;
};

// Connected components of the per-class neighbor graph at neighborhood size
// kappa. Distances are Euclidean on the features as given; ties broken by
// lowest index.
DisjunctPartition find_disjuncts(const Dataset& ds, int kappa,
                                 const DisjunctOptions& opts = {});

// delta(kappa) for kappa = 1..floor(sqrt(N)), with the knee selected.
KappaDeltaCurve kappa_delta_curve(const Dataset& ds, const DisjunctOptions& opts = {});

// Knee: min-max normalize both axes, take the point of maximum perpendicular
// distance to the chord between the curve's endpoints; ties and degenerate
// curves resolve to the smallest kappa.
int knee_point(const std::vector<std::pair<int, int>>& curve);

}  // namespace kpb
