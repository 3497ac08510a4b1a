#include <doctest.h>

#include <random>

#include "kpb/errors.hpp"
#include "kpb/svm.hpp"
#include "support.hpp"

using namespace kpb;

namespace {

KernelMatrix identity_kernel(int n) {
  KernelMatrix K;
  K.sigma = 1.0;
  K.values = Eigen::MatrixXd::Identity(n, n);
  return K;
}

}  // namespace

TEST_CASE("two-point problem has the analytic solution") {
  const KernelMatrix K = identity_kernel(2);
  Eigen::VectorXi y(2);
  y << 1, -1;
  for (double C : {1.0, 10.0, 100.0}) {
    const TrainedSVM m = solve_dual(K, y, C, 1e-8);
    CHECK(m.lambda[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(m.lambda[1] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(m.bias == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(m.sv_indices == std::vector<int>{0, 1});
  }
}

TEST_CASE("single-class labels are infeasible") {
  const KernelMatrix K = identity_kernel(3);
  Eigen::VectorXi y(3);
  y << 1, 1, 1;
  CHECK_THROWS_AS(solve_dual(K, y, 1.0), NumericError);
  y << 1, -1, 2;
  CHECK_THROWS_AS(solve_dual(K, y, 1.0), DataError);
}

TEST_CASE("objective matches the projected-gradient oracle") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 6 + static_cast<int>(bounded(rng, 7));
    const Eigen::MatrixXd X = testsupport::gaussian_blob(rng, n, 2, 0.0, 1.0);
    const KernelMatrix K = gram(X, 0.7 + uniform01(rng));
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) y[i] = i < n / 2 ? 1 : -1;
    const double C = (trial % 2 == 0) ? 1.0 : 10.0;

    const TrainedSVM m = solve_dual(K, y, C, 1e-8, 10000);
    const auto oracle = testsupport::dual_oracle(K.values, y, C);
    const double gap = std::abs(dual_objective(m, K) - oracle.objective);
    CHECK(gap <= 1e-6 * (1.0 + std::abs(oracle.objective)));
  }
}

TEST_CASE("KKT conditions hold at the returned iterate") {
  std::mt19937_64 rng(17);
  const int n = 14;
  const Eigen::MatrixXd X = testsupport::gaussian_blob(rng, n, 3, 0.0, 1.0);
  const KernelMatrix K = gram(X, 1.0);
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) y[i] = i % 3 == 0 ? 1 : -1;
  const double C = 5.0, tol = 1e-6;
  const TrainedSVM m = solve_dual(K, y, C, tol);

  // box and equality constraints
  CHECK(m.lambda.minCoeff() >= 0.0);
  CHECK(m.lambda.maxCoeff() <= C);
  double eq = 0.0;
  for (int i = 0; i < n; ++i) eq += m.lambda[i] * y[i];
  CHECK(std::abs(eq) <= 1e-6 * C);

  // margin conditions against the decision function
  const Eigen::VectorXd f = decision_values(m, K.values);
  for (int i = 0; i < n; ++i) {
    const double yf = y[i] * f[i];
    if (m.lambda[i] <= 0.0) {
      CHECK(yf >= 1.0 - tol - 1e-9);
    } else if (m.lambda[i] >= C) {
      CHECK(yf <= 1.0 + tol + 1e-9);
    } else {
      CHECK(yf == doctest::Approx(1.0).epsilon(tol));
    }
  }
}

TEST_CASE("decision values and prediction") {
  const KernelMatrix K = identity_kernel(2);
  Eigen::VectorXi y(2);
  y << 1, -1;
  const TrainedSVM m = solve_dual(K, y, 10.0, 1e-8);

  SUBCASE("querying training point 0 with its gram column") {
    Eigen::MatrixXd col(2, 1);
    col << 1.0, 0.0;
    const Eigen::VectorXd f = decision_values(m, col);
    CHECK(f[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(predict_labels(m, col)[0] == 1);
  }
  SUBCASE("free support vectors sit on their margins") {
    const Eigen::VectorXd f = decision_values(m, K.values);
    for (int i = 0; i < 2; ++i) {
      if (m.lambda[i] > 0.0 && m.lambda[i] < m.C)
        CHECK(y[i] * f[i] == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("empty expansion returns the bias") {
    TrainedSVM flat = m;
    flat.lambda.setZero();
    flat.bias = -0.75;
    Eigen::MatrixXd cols = Eigen::MatrixXd::Random(2, 5);
    const Eigen::VectorXd f = decision_values(flat, cols);
    for (int j = 0; j < 5; ++j) CHECK(f[j] == doctest::Approx(-0.75));
  }
  SUBCASE("sign convention at zero") {
    TrainedSVM flat = m;
    flat.lambda.setZero();
    flat.bias = 0.0;
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(2, 1);
    CHECK(predict_labels(flat, cols)[0] == 1);
    CHECK(sign_label(-0.3) == -1);
    CHECK(sign_label(0.7) == 1);
  }
  SUBCASE("shape mismatch") {
    Eigen::MatrixXd bad(3, 1);
    bad.setZero();
    CHECK_THROWS_AS(decision_values(m, bad), DataError);
  }
}

TEST_CASE("training predictions separate a separable toy set") {
  auto tg = testsupport::two_gaussians(8, 25, 12, 6.0, 0.4);  // far apart
  const KernelMatrix K = gram(tg.X, 2.0);
  const TrainedSVM m = solve_dual(K, tg.y, 100.0);
  const Eigen::VectorXi h = predict_labels(m, K.values);
  CHECK(h == tg.y);
}

TEST_CASE("unit conformal scaling yields a bit-identical model") {
  auto tg = testsupport::two_gaussians(4, 15, 8);
  const KernelMatrix K = gram(tg.X, 1.0);
  const KernelMatrix scaled = perturb(K, Eigen::VectorXd::Ones(K.n()));
  const TrainedSVM a = solve_dual(K, tg.y, 10.0);
  const TrainedSVM b = solve_dual(scaled, tg.y, 10.0);
  CHECK(a.lambda == b.lambda);
  CHECK(a.bias == b.bias);
  CHECK(a.sv_indices == b.sv_indices);
}

TEST_CASE("non-convergence carries the best iterate") {
  auto tg = testsupport::two_gaussians(2, 20, 10);
  const KernelMatrix K = gram(tg.X, 1.0);
  try {
    solve_dual(K, tg.y, 100.0, 1e-12, 1);  // one sweep cannot finish
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best.lambda.size() == K.n());
    CHECK(e.best.lambda.maxCoeff() > 0.0);
  }
}
