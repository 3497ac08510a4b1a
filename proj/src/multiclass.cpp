#include "kpb/multiclass.hpp"

#include <algorithm>
#include <string>

#include "kpb/errors.hpp"

namespace kpb {

namespace {

std::vector<int> class_rows(const Dataset& ds, int a, int b) {
  std::vector<int> rows;
  for (int i = 0; i < ds.n(); ++i)
    if (ds.labels[i] == a || ds.labels[i] == b) rows.push_back(i);
  return rows;
}

void require_multiclass(const Dataset& ds) {
  if (ds.classes() < 2) throw DataError("decomposition: need at least two classes");
  for (int c = 0; c < ds.classes(); ++c)
    if (ds.class_counts[c] < 2)
      throw DataError("decomposition: class '" + ds.label_names[c] +
                      "' has fewer than two points");
}

template <typename FitBinary>
OvoEnsemble fit_ovo_impl(const Dataset& train, FitBinary fit_binary) {
  require_multiclass(train);
  OvoEnsemble out;
  out.classes = train.classes();
  for (int a = 0; a < train.classes(); ++a) {
    for (int b = a + 1; b < train.classes(); ++b) {
      const Dataset pair_ds = slice(train, class_rows(train, a, b));
      OvoEnsemble::Pair pair;
      pair.class_a = a;
      pair.class_b = b;
      try {
        pair.ensemble = fit_binary(pair_ds, a);
      } catch (const NumericError& e) {
        throw NumericError("ovo pair (" + train.label_names[a] + ", " +
                           train.label_names[b] + "): " + e.what());
      }
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

template <typename FitBinary>
OvaEnsemble fit_ova_impl(const Dataset& train, FitBinary fit_binary) {
  require_multiclass(train);
  OvaEnsemble out;
  out.classes = train.classes();
  for (int c = 0; c < train.classes(); ++c) {
    // two-class view: class c keeps its id, everything else collapses
    Dataset rest = train;
    const int other = c == 0 ? 1 : 0;
    rest.class_counts.assign(train.classes(), 0);
    for (int i = 0; i < train.n(); ++i) {
      if (train.labels[i] != c) rest.labels[i] = other;
      ++rest.class_counts[rest.labels[i]];
    }
    try {
      out.per_class.push_back(fit_binary(rest, c));
    } catch (const NumericError& e) {
      throw NumericError("ova class '" + train.label_names[c] + "' vs rest: " + e.what());
    }
  }
  return out;
}

}  // namespace

OvoEnsemble fit_ovo(const Dataset& train, const BoostParams& params) {
  return fit_ovo_impl(train,
                      [&](const Dataset& ds, int pos) { return fit(ds, params, pos); });
}

OvoEnsemble fit_ovo(const Dataset& train, const RoiParams& params) {
  return fit_ovo_impl(
      train, [&](const Dataset& ds, int pos) { return fit_roi(ds, params, pos); });
}

OvaEnsemble fit_ova(const Dataset& train, const BoostParams& params) {
  return fit_ova_impl(train,
                      [&](const Dataset& ds, int pos) { return fit(ds, params, pos); });
}

OvaEnsemble fit_ova(const Dataset& train, const RoiParams& params) {
  return fit_ova_impl(
      train, [&](const Dataset& ds, int pos) { return fit_roi(ds, params, pos); });
}

namespace detail {

int resolve_ovo_vote(int classes, const std::vector<PairVote>& votes) {
  std::vector<int> counts(classes, 0);
  std::vector<double> margin_sum(classes, 0.0);
  for (const PairVote& v : votes) {
    ++counts[v.winner];
    margin_sum[v.winner] += v.margin_abs;
  }
  const int top = *std::max_element(counts.begin(), counts.end());
  int best = -1;
  for (int c = 0; c < classes; ++c) {
    if (counts[c] != top) continue;
    if (best < 0 || margin_sum[c] > margin_sum[best]) best = c;
  }
  return best;
}

}  // namespace detail

Eigen::VectorXi predict_ovo(const OvoEnsemble& ens, const Dataset& train,
                            const Dataset& test) {
  const int m = test.n();
  std::vector<std::vector<detail::PairVote>> votes(m);

  for (const auto& pair : ens.pairs) {
    const Dataset pair_train = slice(train, class_rows(train, pair.class_a, pair.class_b));
    const Prediction pred =
        pair.ensemble.roi ? predict_roi(pair.ensemble, pair_train.features, test.features)
                          : predict(pair.ensemble, pair_train.features, test.features);
    for (int j = 0; j < m; ++j) {
      const int winner = pred.labels[j] > 0 ? pair.class_a : pair.class_b;
      votes[j].push_back({pair.class_a, pair.class_b, winner, std::abs(pred.margins[j])});
    }
  }

  Eigen::VectorXi out(m);
  for (int j = 0; j < m; ++j) out[j] = detail::resolve_ovo_vote(ens.classes, votes[j]);
  return out;
}

Eigen::VectorXi predict_ova(const OvaEnsemble& ens, const Dataset& train,
                            const Dataset& test) {
  const int m = test.n();
  Eigen::MatrixXd scores(m, ens.classes);
  for (int c = 0; c < ens.classes; ++c) {
    const Ensemble& e = ens.per_class[c];
    const Prediction pred = e.roi ? predict_roi(e, train.features, test.features)
                                  : predict(e, train.features, test.features);
    scores.col(c) = pred.scores;
  }
  Eigen::VectorXi out(m);
  for (int j = 0; j < m; ++j) {
    int best = 0;
    for (int c = 1; c < ens.classes; ++c)
      if (scores(j, c) > scores(j, best)) best = c;
    out[j] = best;
  }
  return out;
}

}  // namespace kpb
