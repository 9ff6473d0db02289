#pragma once

#include <cstdint>
#include <optional>

#include "eivtls/numerics.hpp"

namespace eivtls::model {

enum class NoiseKind { Gaussian, Uniform };

/// How the noisy rows relate to the exact rows. `Shared` draws the noisy
/// rows from all r latent directions, so they also carry the exact-row
/// directions. `Disjoint` withholds the k exact-row directions from the
/// noisy rows, the degenerate design on which plain TLS loses consistency.
enum class ExactRowCoupling { Shared, Disjoint };

struct ModelSpec {
  Index n = 0;
  Index ell = 1;
  Index k = 0;
  Index r = 0;
  /// Asymptotic rank. Unset means r. Directions r_inf..r-1 of the latent
  /// distribution are scaled by m^(-1/4).
  std::optional<Index> r_inf;
  double sigma = 0.0;
  NoiseKind noise = NoiseKind::Gaussian;
  std::uint64_t seed = 0;
  ExactRowCoupling coupling = ExactRowCoupling::Shared;

  Index rank_inf() const { return r_inf.value_or(r); }

  /// Throws InfeasibleSpec unless 0 <= k < r_inf <= r <= n, ell >= 1, sigma >= 0.
  void validate() const;
};

/// Noiseless model: [A1; A2bar] X = [B1; B2bar] with rank(Abar) = r.
struct GroundTruth {
  ModelSpec spec;
  Matrix a_bar;  // m x n, first k rows are A1
  Matrix b_bar;  // m x ell
  Matrix x_min;  // n x ell, orthogonal to Nu(Abar)
  Matrix w;      // n x (n-r) orthonormal basis of Nu(Abar)
  Matrix y_bar;  // (n+ell) x (n+ell-r) = [-Xmin W; I 0]

  Index m() const { return a_bar.rows(); }
  Index n() const { return a_bar.cols(); }
  Index ell() const { return b_bar.cols(); }
  Index k() const { return spec.k; }

  Matrix a1() const { return a_bar.topRows(spec.k); }
  Matrix b1() const { return b_bar.topRows(spec.k); }
  /// [A2bar B2bar]
  Matrix c2_bar() const;
};

/// Observed data. Rows 0..k-1 of (a, b) are exact.
struct ProblemInstance {
  Matrix a;
  Matrix b;
  Index k = 0;

  /// Validates shapes, finiteness and k <= m.
  static ProblemInstance from_blocks(Matrix a, Matrix b, Index k);

  Index m() const { return a.rows(); }
  Index n() const { return a.cols(); }
  Index ell() const { return b.cols(); }

  Matrix a1() const { return a.topRows(k); }
  Matrix b1() const { return b.topRows(k); }
  /// [A1 B1]
  Matrix exact_rows() const;
  /// [A2 B2]
  Matrix c2() const;
};

/// Noiseless counterpart of the solver state: the projected Gram of the
/// clean data and its null space lifted back through P.
struct NoiselessReference {
  Matrix p;      // (n+ell) x (n+ell-k)
  Matrix g_bar;  // P^T C2bar^T C2bar P
  Matrix t_hat;  // g_bar / m
  Matrix v_bar;  // eigenvectors of the n+ell-r smallest eigenvalues of g_bar
  Matrix z_bar;  // P v_bar
};

/// Draws a ground truth for sample size m. The row-distribution matrix, the
/// exact rows and the target X depend only on (spec.seed, replicate); the
/// latent draws of the noisy rows depend on (spec.seed, m, replicate), so
/// growing m keeps the estimand fixed.
GroundTruth synthesize_ground_truth(const ModelSpec& spec, Index m, std::uint64_t replicate = 0);

/// Builds a ground truth from an explicit noiseless coefficient matrix
/// (first spec.k rows exact) and a raw target, which is projected onto the
/// row space of a_bar to give the minimal-norm X.
GroundTruth make_ground_truth(const ModelSpec& spec, Matrix a_bar, const Matrix& x_raw);

/// Adds i.i.d. zero-mean variance sigma^2 noise to rows k..m-1. With
/// sigma == 0 the blocks are copied bit for bit.
ProblemInstance add_noise(const GroundTruth& gt, std::uint64_t noise_seed);

/// X = Xmin + W L.
Matrix solution_set_member(const GroundTruth& gt, const Matrix& l);

NoiselessReference noiseless_reference(const GroundTruth& gt);

/// Stateless 64-bit seed mixing used for all derived RNG streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace eivtls::model
