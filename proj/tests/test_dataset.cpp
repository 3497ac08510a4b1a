#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "kpb/dataset.hpp"
#include "kpb/errors.hpp"
#include "support.hpp"

using namespace kpb;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = std::string("/tmp/kpb_test_") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_csv basic structure") {
  const auto path = write_temp("basic.csv", "1,2,a\n3,4,b\n5,6,a\n7,8,b\n");
  const Dataset ds = load_csv(path, 2);
  CHECK(ds.n() == 4);
  CHECK(ds.dim() == 2);
  CHECK(ds.classes() == 2);
  CHECK(ds.class_counts == std::vector<int>{2, 2});
  CHECK(ds.label_names == std::vector<std::string>{"a", "b"});
  CHECK(ds.labels[0] == 0);
  CHECK(ds.labels[1] == 1);
  CHECK(ds.features(3, 1) == 8.0);
  ds.validate();
  std::remove(path.c_str());
}

TEST_CASE("load_csv single class is degenerate") {
  const auto path = write_temp("single.csv", "1,2,a\n3,4,a\n");
  CHECK_THROWS_AS(load_csv(path, 2), DataError);
  std::remove(path.c_str());
}

TEST_CASE("load_csv header auto-detection") {
  const auto path = write_temp("header.csv", "x1,x2,label\n1,2,a\n3,4,b\n");
  const Dataset ds = load_csv(path, 2);
  CHECK(ds.n() == 2);
  CHECK(ds.label_names[0] == "a");
  std::remove(path.c_str());
}

TEST_CASE("load_csv malformed row reports the line") {
  const auto path = write_temp("bad.csv", "1,2,a\n3,oops,b\n");
  CHECK_THROWS_WITH_AS(load_csv(path, 2),
                       "malformed row at line 2: cell 'oops' is not numeric", DataError);
  const auto path2 = write_temp("bad2.csv", "1,2,a\n3,4\n");
  CHECK_THROWS_AS(load_csv(path2, 2), DataError);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("load_csv iris12vs3") {
  const Dataset ds = load_csv(std::string(KPB_DATA_DIR) + "/iris12vs3.csv", 4);
  CHECK(ds.n() == 150);
  CHECK(ds.dim() == 4);
  CHECK(ds.classes() == 2);
  CHECK(imbalance_ratio(ds) == doctest::Approx(2.0));
}

TEST_CASE("normalize uses population std from the training set") {
  Dataset train;
  train.features.resize(2, 2);
  train.features << 1, 5, 3, 5;  // col0 = [1,3], col1 constant
  train.labels.resize(2);
  train.labels << 0, 1;
  train.class_counts = {1, 1};
  train.label_names = {"a", "b"};

  Dataset apply = train;
  apply.features(0, 0) = 2.0;  // equals the train mean

  auto [tr, ap] = normalize(train, apply);
  CHECK(tr.features(0, 0) == doctest::Approx(-1.0));  // std 1 under /n
  CHECK(tr.features(1, 0) == doctest::Approx(1.0));
  CHECK(tr.features(0, 1) == 0.0);
  CHECK(tr.features(1, 1) == 0.0);
  CHECK(ap.features(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("normalized training features have mean 0 and std 1") {
  auto tg = testsupport::two_gaussians(11, 40, 20);
  Dataset ds = testsupport::to_dataset(tg);
  auto [norm, unused] = normalize(ds, ds);
  for (int j = 0; j < norm.dim(); ++j) {
    const double mean = norm.features.col(j).mean();
    const double var = norm.features.col(j).array().square().mean() - mean * mean;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("stratified_kfold exact split and determinism") {
  auto tg = testsupport::two_gaussians(3, 10, 10);
  Dataset ds = testsupport::to_dataset(tg);
  const FoldPlan plan = stratified_kfold(ds, 10, 42);
  for (const auto& fold : plan.folds) {
    REQUIRE(fold.test.size() == 2);
    CHECK(ds.labels[fold.test[0]] + ds.labels[fold.test[1]] == 1);  // one per class
  }
  const FoldPlan again = stratified_kfold(ds, 10, 42);
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    CHECK(plan.folds[f].test == again.folds[f].test);
    CHECK(plan.folds[f].train == again.folds[f].train);
  }
  CHECK(foldplan_to_text(plan) == foldplan_to_text(again));
}

TEST_CASE("stratified_kfold rejects classes smaller than k") {
  auto tg = testsupport::two_gaussians(5, 20, 7);
  Dataset ds = testsupport::to_dataset(tg);
  CHECK_THROWS_WITH_AS(stratified_kfold(ds, 10, 1),
                       "stratified_kfold: class 'minority' has 7 points, fewer than k=10",
                       DataError);
}

TEST_CASE("stratified_kfold test sets partition the indices") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto tg = testsupport::two_gaussians(seed, 53, 21);
    Dataset ds = testsupport::to_dataset(tg);
    const FoldPlan plan = stratified_kfold(ds, 5, seed);
    std::set<int> seen;
    for (const auto& fold : plan.folds) {
      for (int i : fold.test) {
        CHECK(seen.insert(i).second);  // pairwise disjoint
      }
      // per-fold class proportions within one point of the global ones
      int pos = 0;
      for (int i : fold.test)
        if (ds.labels[i] == 1) ++pos;
      const double expected = 21.0 / 5.0;
      CHECK(std::abs(pos - expected) <= 1.0);
    }
    CHECK(static_cast<int>(seen.size()) == ds.n());
  }
}

TEST_CASE("subsample preserves the imbalance ratio") {
  auto tg = testsupport::two_gaussians(9, 100, 10);
  Dataset ds = testsupport::to_dataset(tg);

  const Dataset half = subsample_preserving_imbalance(ds, 0.5, 1);
  CHECK(half.class_counts == std::vector<int>{50, 5});
  CHECK(imbalance_ratio(half) == doctest::Approx(10.0));

  const Dataset all = subsample_preserving_imbalance(ds, 1.0, 1);
  CHECK(all.class_counts == ds.class_counts);

  // analytic rounding bound on the ratio drift
  for (double fraction : {0.3, 0.55, 0.8}) {
    const Dataset sub = subsample_preserving_imbalance(ds, fraction, 7);
    const double before = imbalance_ratio(ds);
    const double after = imbalance_ratio(sub);
    double bound = 0.0;
    for (int c : sub.class_counts) bound = std::max(bound, 1.0 / c);
    CHECK(std::abs(before - after) <= bound * before);
  }
}

TEST_CASE("subsample rounding per class") {
  auto tg = testsupport::two_gaussians(13, 9, 3);
  Dataset ds = testsupport::to_dataset(tg);
  const Dataset third = subsample_preserving_imbalance(ds, 1.0 / 3.0, 5);
  CHECK(third.class_counts == std::vector<int>{3, 1});

  CHECK_THROWS_AS(subsample_preserving_imbalance(ds, 0.1, 5), DataError);
  CHECK_THROWS_AS(subsample_preserving_imbalance(ds, 0.0, 5), ConfigError);
}
