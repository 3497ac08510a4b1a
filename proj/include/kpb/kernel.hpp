#pragma once

#include <Eigen/Dense>
#include <string>

namespace kpb {

// Symmetric PSD Gram matrix together with the RBF width it was built with.
struct KernelMatrix {
  Eigen::MatrixXd values;  // n x n
  double sigma = 0.0;

  int n() const { return static_cast<int>(values.rows()); }
};

// Per-point perturbation parameters k_i at a given boosting round.
// k is all zeros at round 1 and element-wise nondecreasing afterwards.
struct PerturbationState {
  Eigen::VectorXd k;
  int round = 1;
};

// exp(-|a - b|^2 / (2 sigma^2))
double rbf(const Eigen::Ref<const Eigen::VectorXd>& a,
           const Eigen::Ref<const Eigen::VectorXd>& b, double sigma);

// Full Gram matrix of X against itself. Exactly symmetric (upper triangle
// mirrored) with unit diagonal.
KernelMatrix gram(const Eigen::Ref<const Eigen::MatrixXd>& X, double sigma);

// n x m kernel block between training rows and query rows.
Eigen::MatrixXd gram_cross(const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                           const Eigen::Ref<const Eigen::MatrixXd>& X_query, double sigma);

// D_i = exp(-k_i * f_prev_i^2), each in (0, 1].
Eigen::VectorXd transformation_factors(const PerturbationState& state,
                                       const Eigen::Ref<const Eigen::VectorXd>& f_prev);

// Conformal scaling: entry (i,j) multiplied by D_i * D_j. The result is
// exactly symmetric when K is.
KernelMatrix perturb(const KernelMatrix& K, const Eigen::Ref<const Eigen::VectorXd>& D);

// Cross-kernel variant: entry (i,j) multiplied by D_train_i * D_query_j.
Eigen::MatrixXd perturb_cross(const Eigen::Ref<const Eigen::MatrixXd>& K_cross,
                              const Eigen::Ref<const Eigen::VectorXd>& D_train,
                              const Eigen::Ref<const Eigen::VectorXd>& D_query);

// Binary dump, little-endian: 16-byte header (magic "KPBK", u32 n, 8 reserved
// bytes) followed by row-major 64-bit floats.
void write_kernel_dump(const std::string& path, const Eigen::Ref<const Eigen::MatrixXd>& K);
Eigen::MatrixXd read_kernel_dump(const std::string& path);

}  // namespace kpb
