#include "eivtls/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eivtls/error.hpp"

namespace eivtls::metrics {

namespace {

Matrix ensure_orthonormal(const Matrix& u) {
  if (u.cols() == 0) return u;
  const Matrix gram = u.transpose() * u;
  if ((gram - Matrix::Identity(u.cols(), u.cols())).norm() <= 1e-8) return u;
  return numerics::orthonormal_range(u);
}

std::vector<double> singular_values(const Matrix& m) {
  std::vector<double> out;
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  out.assign(s.data(), s.data() + s.size());
  return out;
}

}  // namespace

SubspaceReport principal_angles(const Matrix& u1_in, const Matrix& u2_in) {
  if (u1_in.rows() != u2_in.rows()) throw Error(ErrorCode::ShapeMismatch, "subspace bases live in different dimensions");
  numerics::require_finite(u1_in, "basis");
  numerics::require_finite(u2_in, "basis");
  Matrix a = ensure_orthonormal(u1_in);
  Matrix b = ensure_orthonormal(u2_in);

  SubspaceReport rep;
  rep.dim1 = a.cols();
  rep.dim2 = b.cols();
  if (a.cols() > b.cols()) std::swap(a, b);
  const Index count = a.cols();
  if (count == 0) return rep;

  // cosines descending and sines descending of the same angle set
  const std::vector<double> cosines = singular_values(b.transpose() * a);
  std::vector<double> sines = singular_values(a - b * (b.transpose() * a));
  sines.resize(static_cast<std::size_t>(count), 0.0);
  std::sort(sines.begin(), sines.end());  // ascending: pairs with descending cosines

  rep.angles.resize(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < rep.angles.size(); ++i) {
    const double s = std::clamp(sines[i], 0.0, 1.0);
    const double c = std::clamp(cosines[i], 0.0, 1.0);
    rep.angles[i] = s < std::numbers::sqrt2 / 2 ? std::asin(s) : std::acos(c);
  }
  std::sort(rep.angles.begin(), rep.angles.end());
  rep.sin_max = std::sin(rep.angles.back());
  return rep;
}

std::pair<bool, SubspaceReport> subspace_equal(const Matrix& u1, const Matrix& u2, double tol) {
  if (u1.cols() != u2.cols()) throw Error(ErrorCode::DimensionMismatch, "subspaces of different dimension cannot be equal");
  SubspaceReport rep = principal_angles(u1, u2);
  return {rep.sin_max <= tol, std::move(rep)};
}

std::pair<bool, SubspaceReport> subspace_contained(const Matrix& u_small, const Matrix& u_big, double tol) {
  if (u_small.cols() > u_big.cols()) throw Error(ErrorCode::ShapeMismatch, "contained subspace has the larger dimension");
  SubspaceReport rep = principal_angles(u_small, u_big);
  return {rep.sin_max <= tol, std::move(rep)};
}

double gram_limit_residual(const Matrix& g, Index m, const Matrix& t_hat, double sigma) {
  if (g.rows() != g.cols() || g.rows() != t_hat.rows() || t_hat.rows() != t_hat.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "G and T_hat must be square of equal size");
  }
  const Matrix limit = t_hat + sigma * sigma * Matrix::Identity(g.rows(), g.cols());
  return (g / static_cast<double>(m) - limit).norm();
}

DkCheck davis_kahan_check(const Matrix& v, const Matrix& v_bar, const Matrix& g, Index m, const Matrix& t_hat,
                          double sigma, double eps) {
  const double s2 = sigma * sigma;
  if (!(eps > 0.0 && eps < s2)) throw Error(ErrorCode::InvalidSlack, "need 0 < eps < sigma^2");
  if (v.rows() != v_bar.rows() || v.cols() != v_bar.cols() || g.rows() != v.rows() || t_hat.rows() != g.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "V, V_bar, G and T_hat do not conform");
  }
  const Index dim = v.rows();
  const Matrix outside = Matrix::Identity(dim, dim) - v_bar * v_bar.transpose();
  const Matrix perturbation = t_hat + s2 * Matrix::Identity(dim, dim) - g / static_cast<double>(m);

  DkCheck out;
  out.eps = eps;
  out.lhs = numerics::spectral_norm(outside * v);
  out.rhs = numerics::spectral_norm(outside * perturbation * v) / (s2 - eps);
  out.violated = out.lhs > out.rhs + 1e-10;
  return out;
}

}  // namespace eivtls::metrics
