#include "eivtls/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "eivtls/error.hpp"

namespace eivtls::solvers {

using numerics::kRankTol;

Matrix SolutionSet::member(const Matrix& l) const {
  if (l.rows() != w_hat.cols() || l.cols() != x_star.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "L must be (n-rank) x ell");
  }
  return x_star + w_hat * l;
}

Matrix build_P(const Matrix& a1, const Matrix& b1) {
  if (a1.rows() != b1.rows()) throw Error(ErrorCode::ShapeMismatch, "A1 and B1 row counts differ");
  const Index k = a1.rows();
  const Index width = a1.cols() + b1.cols();
  if (k == 0) return Matrix::Identity(width, width);

  Matrix exact(k, width);
  exact << a1, b1;
  numerics::require_finite(exact, "[A1 B1]");
  if (numerics::numerical_rank(exact) < k) {
    throw Error(ErrorCode::RowRankDeficient, "exact rows [A1 B1] are linearly dependent; select independent rows");
  }
  if (numerics::numerical_rank(a1) < k) {
    // y^T A1 = 0 but y^T B1 != 0: the exact rows cannot be satisfied.
    const Matrix y = numerics::orthonormal_nullspace(a1.transpose());
    std::ostringstream msg;
    msg << "a combination of exact rows reads 0*X = " << (y.col(0).transpose() * b1) << " (row weights "
        << y.col(0).transpose() << ")";
    throw Error(ErrorCode::InconsistentExactRows, msg.str());
  }
  Matrix p = numerics::orthonormal_nullspace(exact);
  if (p.cols() != width - k) throw Error(ErrorCode::RowRankDeficient, "unexpected nullspace dimension for [A1 B1]");
  return p;
}

Matrix form_G(const Matrix& c2, const Matrix& p) {
  if (c2.cols() != p.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "C2 has " + std::to_string(c2.cols()) + " columns, P has " +
                                              std::to_string(p.rows()) + " rows");
  }
  const Matrix u = c2 * p;
  Matrix g = u.transpose() * u;
  return 0.5 * (g + g.transpose());
}

RitzBasis ritz_subspace(const Matrix& g, const Matrix& p, Index rank, Index ell) {
  if (g.rows() != p.cols()) throw Error(ErrorCode::ShapeMismatch, "G and P do not conform");
  const Index total = p.rows();
  const Index n = total - ell;
  const Index k = total - p.cols();
  if (ell < 1 || n < 1) throw Error(ErrorCode::ShapeMismatch, "invalid ell for P");
  if (!(k < rank && rank <= n)) {
    throw Error(ErrorCode::InfeasibleSpec, "rank must satisfy k < rank <= n (k=" + std::to_string(k) +
                                               ", rank=" + std::to_string(rank) + ", n=" + std::to_string(n) + ")");
  }
  const auto eig = numerics::sym_eig_ascending(g);
  const Index d = total - rank;

  RitzBasis basis;
  basis.n = n;
  basis.ell = ell;
  basis.rank = rank;
  basis.p = p;
  basis.eigvals = eig.values;
  basis.v = eig.vectors.leftCols(d);
  basis.z = p * basis.v;
  basis.z_upper = basis.z.topRows(n);
  basis.z_lower = basis.z.bottomRows(ell);
  basis.spectral_gap = eig.values(d) - eig.values(d - 1);
  const double scale = eig.values.cwiseAbs().maxCoeff();
  basis.gap_degenerate = !(basis.spectral_gap > kGapDegenerateTol * scale);
  return basis;
}

Matrix minimal_norm_from_Z(const RitzBasis& basis) {
  Matrix pinv;
  try {
    pinv = numerics::pinv_full_row_rank(basis.z_lower);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RankDeficientRows) throw;
    throw Error(ErrorCode::NotGeneric, std::string("lower block of the Ritz basis lacks full row rank (") + e.what() + ")");
  }
  return -basis.z_upper * pinv;
}

Matrix nullspace_from_Z(const RitzBasis& basis) {
  if (numerics::numerical_rank(basis.z_lower) < basis.ell) {
    throw Error(ErrorCode::NotGeneric, "lower block of the Ritz basis lacks full row rank");
  }
  const Matrix perp = numerics::orthonormal_nullspace(basis.z_lower);
  if (perp.cols() != basis.n - basis.rank) throw Error(ErrorCode::NotGeneric, "unexpected nullspace dimension of Z_lower");
  return basis.z_upper * perp;
}

SolutionSet solve_ctls(const CtlsProblem& problem) {
  const auto& inst = problem.instance;
  const Matrix p = build_P(inst.a1(), inst.b1());
  const Matrix g = form_G(inst.c2(), p);

  SolutionSet out;
  if (problem.rank) {
    out.rank_decision.rank = *problem.rank;
    out.rank_decision.cluster_size = inst.n() + inst.ell() - *problem.rank;
  } else {
    out.rank_decision = estimate_rank(numerics::sym_eig_ascending(g).values, inst.ell(), inst.k, inst.m());
  }
  out.basis = ritz_subspace(g, p, out.rank_decision.rank, inst.ell());
  out.x_star = minimal_norm_from_Z(out.basis);
  out.z_lower_perp = numerics::orthonormal_nullspace(out.basis.z_lower);
  out.w_hat = out.basis.z_upper * out.z_lower_perp;
  if (out.w_hat.cols() != inst.n() - out.rank_decision.rank) {
    throw Error(ErrorCode::NotGeneric, "unexpected nullspace dimension of Z_lower");
  }
  return out;
}

Matrix solve_tls(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "A and B row counts differ");
  numerics::require_finite(a, "A");
  numerics::require_finite(b, "B");
  const Index n = a.cols();
  const Index ell = b.cols();
  Matrix c(a.rows(), n + ell);
  c << a, b;
  const auto eig = numerics::sym_eig_ascending(c.transpose() * c);

  // sigma_n > sigma_{n+1} of C, i.e. a gap between eigenvalue ell and ell+1.
  const double s_small = std::sqrt(std::max(eig.values(ell - 1), 0.0));
  const double s_next = std::sqrt(std::max(eig.values(ell), 0.0));
  const double s_max = std::sqrt(std::max(eig.values(n + ell - 1), 0.0));
  if (!(s_next - s_small > kRankTol * s_max)) {
    throw Error(ErrorCode::NotGeneric, "no gap between singular values n and n+1 of [A B]");
  }
  const Matrix z_upper = eig.vectors.topLeftCorner(n, ell);
  const Matrix z_lower = eig.vectors.bottomLeftCorner(ell, ell);
  Eigen::JacobiSVD<Matrix> svd(z_lower);
  const Vector& s = svd.singularValues();
  if (!(s(ell - 1) > kRankTol * s(0))) throw Error(ErrorCode::NotGeneric, "lower eigenvector block is singular");
  // X = -Z_upper Z_lower^{-1}
  return -z_lower.transpose().partialPivLu().solve(z_upper.transpose()).transpose();
}

SolutionSet solve_ttls(const Matrix& a, const Matrix& b, Index rank) {
  return solve_ctls(CtlsProblem{model::ProblemInstance::from_blocks(a, b, 0), rank});
}

RankDecision estimate_rank(const Vector& eigvals, Index ell, Index k, Index m) {
  const Index count = eigvals.size();
  const Index n = count + k - ell;
  if (ell < 1 || n < 1 || count < ell + 1) {
    throw Error(ErrorCode::ShapeMismatch, "need at least ell+1 eigenvalues");
  }
  for (Index i = 0; i + 1 < count; ++i) {
    if (eigvals(i) > eigvals(i + 1)) throw Error(ErrorCode::ShapeMismatch, "eigenvalues must be ascending");
  }
  const double floor = 1e-12 * std::abs(eigvals(count - 1)) * static_cast<double>(m);

  RankDecision out;
  out.estimated = true;
  Index best = -1;
  double best_gap = -1.0;
  // cluster size c uses 1-based lambda_c and lambda_{c+1}
  for (Index c = ell; c < count; ++c) {
    const double lo = eigvals(c - 1);
    const double denom = std::abs(lo) + floor;
    double gap = eigvals(c) - lo;
    gap = denom > 0.0 ? gap / denom : (gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.relative_gaps.push_back(gap);
    if (gap >= best_gap) {
      best_gap = gap;
      best = c;
    }
  }
  if (!(best_gap > 10.0 * std::numeric_limits<double>::epsilon())) {
    throw Error(ErrorCode::NoGap, "all relative eigenvalue gaps are below 10x machine precision");
  }
  Index rank = n + ell - best;
  const Index clamped = std::clamp(rank, k + 1, n);
  out.clamped = clamped != rank;
  out.rank = clamped;
  out.cluster_size = n + ell - clamped;
  return out;
}

}  // namespace eivtls::solvers
