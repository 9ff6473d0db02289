#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "eivtls/numerics.hpp"

namespace eivtls::testing {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline Matrix random_orthogonal(Index dim, std::uint64_t seed) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(dim, dim, seed));
  return qr.householderQ() * Matrix::Identity(dim, dim);
}

inline Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  return random_orthogonal(rows, seed).leftCols(cols);
}

/// Sine of the largest principal angle computed through orthogonal
/// projectors, independent of the metrics module.
inline double projector_distance(const Matrix& u1, const Matrix& u2) {
  auto projector = [](const Matrix& u) {
    Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeThinU);
    Index rank = 0;
    const auto& s = svd.singularValues();
    while (rank < s.size() && s(rank) > 1e-12 * s(0)) ++rank;
    const Matrix q = svd.matrixU().leftCols(rank);
    return Matrix(q * q.transpose());
  };
  Eigen::JacobiSVD<Matrix> svd(projector(u1) - projector(u2));
  return svd.singularValues()(0);
}

class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("eivtls_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace eivtls::testing
