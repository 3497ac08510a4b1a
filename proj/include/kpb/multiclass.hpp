#pragma once

#include <vector>

#include "kpb/boost.hpp"
#include "kpb/dataset.hpp"
#include "kpb/roi.hpp"

namespace kpb {

// One ensemble per unordered class pair; the lower class id maps to +1.
struct OvoEnsemble {
  struct Pair {
    int class_a = -1;  // +1 side
    int class_b = -1;  // -1 side
    Ensemble ensemble;
  };
  std::vector<Pair> pairs;
  int classes = 0;
};

// One class-versus-rest ensemble per class; the class itself maps to +1.
struct OvaEnsemble {
  std::vector<Ensemble> per_class;
  int classes = 0;
};

OvoEnsemble fit_ovo(const Dataset& train, const BoostParams& params);
OvoEnsemble fit_ovo(const Dataset& train, const RoiParams& params);

OvaEnsemble fit_ova(const Dataset& train, const BoostParams& params);
OvaEnsemble fit_ova(const Dataset& train, const RoiParams& params);

// Plurality vote over pair predictions; ties broken by the largest summed
// |margin| among the tied classes, then by the lowest class id.
Eigen::VectorXi predict_ovo(const OvoEnsemble& ens, const Dataset& train,
                            const Dataset& test);

// argmax over classes of the alpha-normalized ensemble score; ties to the
// lowest class id.
Eigen::VectorXi predict_ova(const OvaEnsemble& ens, const Dataset& train,
                            const Dataset& test);

namespace detail {

// Vote aggregation, exposed for direct testing. votes[p] = (class_a, class_b,
// winner, |margin|) for pair p.
struct PairVote {
  int class_a;
  int class_b;
  int winner;
  double margin_abs;
};
int resolve_ovo_vote(int classes, const std::vector<PairVote>& votes);

}  // namespace detail

}  // namespace kpb
