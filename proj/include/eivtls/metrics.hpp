#pragma once

#include <utility>
#include <vector>

#include "eivtls/numerics.hpp"

namespace eivtls::metrics {

struct SubspaceReport {
  std::vector<double> angles;  // radians, non-decreasing
  double sin_max = 0.0;        // sin(angles.back()), 0 when there are no angles
  Index dim1 = 0;
  Index dim2 = 0;
};

/// Quantities of the sin-theta bound for the smallest-eigenvalue subspace of
/// m^-1 G against the null space of the limit T + sigma^2 I.
struct DkCheck {
  double lhs = 0.0;  // ||(I - Vb Vb^T) V||_2
  double rhs = 0.0;  // ||(I - Vb Vb^T)(T + sigma^2 I - G/m) V||_2 / (sigma^2 - eps)
  double eps = 0.0;
  bool violated = false;
};

/// Principal angles between Ra(u1) and Ra(u2). Inputs that are not
/// orthonormal to 1e-8 are re-orthonormalized first. Small angles come from
/// the sines of the residual so they stay accurate near zero.
SubspaceReport principal_angles(const Matrix& u1, const Matrix& u2);

/// Equal dimension required (DimensionMismatch otherwise).
std::pair<bool, SubspaceReport> subspace_equal(const Matrix& u1, const Matrix& u2, double tol);

/// Every direction of Ra(u_small) lies within sine tol of Ra(u_big).
std::pair<bool, SubspaceReport> subspace_contained(const Matrix& u_small, const Matrix& u_big, double tol);

/// ||G/m - (t_hat + sigma^2 I)||_F
double gram_limit_residual(const Matrix& g, Index m, const Matrix& t_hat, double sigma);

DkCheck davis_kahan_check(const Matrix& v, const Matrix& v_bar, const Matrix& g, Index m, const Matrix& t_hat,
                          double sigma, double eps);

}  // namespace eivtls::metrics
