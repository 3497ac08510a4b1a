#include "kpb/kernel.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "kpb/errors.hpp"

namespace kpb {

double rbf(const Eigen::Ref<const Eigen::VectorXd>& a,
           const Eigen::Ref<const Eigen::VectorXd>& b, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("rbf: sigma must be positive");
  if (a.size() != b.size()) throw DataError("rbf: dimension mismatch");
  return std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

KernelMatrix gram(const Eigen::Ref<const Eigen::MatrixXd>& X, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gram: sigma must be positive");
  if (!X.allFinite()) throw NumericError("gram: non-finite feature value");
  const int n = static_cast<int>(X.rows());
  const double inv = 1.0 / (2.0 * sigma * sigma);
  KernelMatrix K;
  K.sigma = sigma;
  K.values.resize(n, n);
  for (int i = 0; i < n; ++i) {
    K.values(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double v = std::exp(-(X.row(i) - X.row(j)).squaredNorm() * inv);
      K.values(i, j) = v;
      K.values(j, i) = v;
    }
  }
  return K;
}

Eigen::MatrixXd gram_cross(const Eigen::Ref<const Eigen::MatrixXd>& X_train,
                           const Eigen::Ref<const Eigen::MatrixXd>& X_query, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gram_cross: sigma must be positive");
  if (X_train.cols() != X_query.cols()) throw DataError("gram_cross: dimension mismatch");
  if (!X_train.allFinite() || !X_query.allFinite())
    throw NumericError("gram_cross: non-finite feature value");
  const int n = static_cast<int>(X_train.rows());
  const int m = static_cast<int>(X_query.rows());
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Eigen::MatrixXd K(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      K(i, j) = std::exp(-(X_train.row(i) - X_query.row(j)).squaredNorm() * inv);
  return K;
}

Eigen::VectorXd transformation_factors(const PerturbationState& state,
                                       const Eigen::Ref<const Eigen::VectorXd>& f_prev) {
  if (state.k.size() != f_prev.size())
    throw DataError("transformation_factors: length mismatch");
  if ((state.k.array() < 0.0).any())
    throw NumericError("transformation_factors: negative perturbation parameter");
  return (-state.k.array() * f_prev.array().square()).exp();
}

KernelMatrix perturb(const KernelMatrix& K, const Eigen::Ref<const Eigen::VectorXd>& D) {
  if (D.size() != K.n()) throw DataError("perturb: factor length mismatch");
  if ((D.array() <= 0.0).any() || (D.array() > 1.0).any())
    throw ConfigError("perturb: factors must lie in (0, 1]");
  KernelMatrix out;
  out.sigma = K.sigma;
  // D * D^T is exactly symmetric, so the product keeps K's symmetry bit-exact.
  out.values = K.values.cwiseProduct(D * D.transpose());
  return out;
}

Eigen::MatrixXd perturb_cross(const Eigen::Ref<const Eigen::MatrixXd>& K_cross,
                              const Eigen::Ref<const Eigen::VectorXd>& D_train,
                              const Eigen::Ref<const Eigen::VectorXd>& D_query) {
  if (D_train.size() != K_cross.rows() || D_query.size() != K_cross.cols())
    throw DataError("perturb_cross: factor length mismatch");
  if ((D_train.array() <= 0.0).any() || (D_query.array() <= 0.0).any())
    throw ConfigError("perturb_cross: factors must be positive");
  Eigen::MatrixXd out = K_cross;
  out.array().colwise() *= D_train.array();
  out.array().rowwise() *= D_query.transpose().array();
  return out;
}

void write_kernel_dump(const std::string& path, const Eigen::Ref<const Eigen::MatrixXd>& K) {
  if (K.rows() != K.cols()) throw DataError("kernel dump: matrix not square");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  char header[16] = {};
  std::memcpy(header, "KPBK", 4);
  const std::uint32_t n = static_cast<std::uint32_t>(K.rows());
  std::memcpy(header + 4, &n, 4);
  out.write(header, sizeof(header));
  for (int i = 0; i < K.rows(); ++i)
    out.write(reinterpret_cast<const char*>(K.row(i).eval().data()),
              static_cast<std::streamsize>(sizeof(double)) * K.cols());
  if (!out) throw DataError("short write to " + path);
}

Eigen::MatrixXd read_kernel_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char header[16];
  in.read(header, sizeof(header));
  if (!in || std::memcmp(header, "KPBK", 4) != 0)
    throw DataError(path + ": not a kernel dump");
  std::uint32_t n;
  std::memcpy(&n, header + 4, 4);
  Eigen::MatrixXd K(n, n);
  std::vector<double> row(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double)) * n);
    if (!in) throw DataError(path + ": truncated kernel dump");
    for (std::uint32_t j = 0; j < n; ++j) K(i, j) = row[j];
  }
  return K;
}

}  // namespace kpb
