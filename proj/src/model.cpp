#include "eivtls/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "eivtls/error.hpp"
#include "eivtls/solvers.hpp"

namespace eivtls::model {

namespace {

// splitmix64 finalizer
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kStructureStream = 0x5354525543545552ULL;
constexpr std::uint64_t kLatentStream = 0x4c4154454e545f5fULL;

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
  return out;
}

std::string dims(Index a, Index b) { return std::to_string(a) + "x" + std::to_string(b); }

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return splitmix(splitmix(a) ^ (b + 0x632be59bd9b4e019ULL)); }

void ModelSpec::validate() const {
  const Index ri = rank_inf();
  if (ell < 1) throw Error(ErrorCode::InfeasibleSpec, "ell must be >= 1");
  if (k < 0) throw Error(ErrorCode::InfeasibleSpec, "k must be >= 0");
  if (!(k < r)) throw Error(ErrorCode::InfeasibleSpec, "need k < r (k=" + std::to_string(k) + ", r=" + std::to_string(r) + ")");
  if (r > n) throw Error(ErrorCode::InfeasibleSpec, "need r <= n");
  if (!(k < ri) || ri > r) throw Error(ErrorCode::InfeasibleSpec, "need k < r_inf <= r");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InfeasibleSpec, "sigma must be finite and >= 0");
}

Matrix GroundTruth::c2_bar() const {
  const Index rows = m() - k();
  Matrix c(rows, n() + ell());
  c << a_bar.bottomRows(rows), b_bar.bottomRows(rows);
  return c;
}

ProblemInstance ProblemInstance::from_blocks(Matrix a, Matrix b, Index k) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "A is " + dims(a.rows(), a.cols()) + " but B is " + dims(b.rows(), b.cols()));
  }
  if (a.cols() < 1 || b.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "A and B need at least one column");
  if (k < 0 || k > a.rows()) throw Error(ErrorCode::ShapeMismatch, "k out of range for " + std::to_string(a.rows()) + " rows");
  numerics::require_finite(a, "A");
  numerics::require_finite(b, "B");
  return ProblemInstance{std::move(a), std::move(b), k};
}

Matrix ProblemInstance::exact_rows() const {
  Matrix c(k, n() + ell());
  c << a.topRows(k), b.topRows(k);
  return c;
}

Matrix ProblemInstance::c2() const {
  const Index rows = m() - k;
  Matrix c(rows, n() + ell());
  c << a.bottomRows(rows), b.bottomRows(rows);
  return c;
}

GroundTruth make_ground_truth(const ModelSpec& spec, Matrix a_bar, const Matrix& x_raw) {
  spec.validate();
  const Index n = spec.n;
  const Index ell = spec.ell;
  const Index m = a_bar.rows();
  if (a_bar.cols() != n || x_raw.rows() != n || x_raw.cols() != ell) {
    throw Error(ErrorCode::ShapeMismatch, "a_bar must be m x n and x_raw n x ell");
  }
  if (m < spec.k) throw Error(ErrorCode::DimensionTooSmall, "fewer rows than exact rows");
  numerics::require_finite(a_bar, "a_bar");
  numerics::require_finite(x_raw, "x_raw");

  if (numerics::numerical_rank(a_bar.topRows(spec.k)) != spec.k) {
    throw Error(ErrorCode::InfeasibleSpec, "exact rows A1 are not of full row rank");
  }
  Matrix w = numerics::orthonormal_nullspace(a_bar);
  if (n - w.cols() != spec.r) {
    throw Error(ErrorCode::InfeasibleSpec,
                "rank(a_bar) = " + std::to_string(n - w.cols()) + ", spec asks for " + std::to_string(spec.r));
  }

  GroundTruth gt;
  gt.spec = spec;
  gt.x_min = x_raw - w * (w.transpose() * x_raw);
  gt.b_bar = a_bar * gt.x_min;
  gt.a_bar = std::move(a_bar);
  gt.w = std::move(w);

  const Index cols = n + ell - spec.r;
  gt.y_bar = Matrix::Zero(n + ell, cols);
  gt.y_bar.topLeftCorner(n, ell) = -gt.x_min;
  gt.y_bar.bottomLeftCorner(ell, ell).setIdentity();
  gt.y_bar.topRightCorner(n, n - spec.r) = gt.w;
  return gt;
}

GroundTruth synthesize_ground_truth(const ModelSpec& spec, Index m, std::uint64_t replicate) {
  spec.validate();
  if (m <= spec.n + spec.ell) {
    throw Error(ErrorCode::DimensionTooSmall,
                "m = " + std::to_string(m) + " must exceed n+ell = " + std::to_string(spec.n + spec.ell));
  }
  const Index n = spec.n;
  const Index r = spec.r;
  const Index k = spec.k;
  const Index r_inf = spec.rank_inf();

  std::mt19937_64 structure(mix_seed(mix_seed(spec.seed, kStructureStream), replicate));
  const Matrix row_basis = gaussian_matrix(r, n, structure);
  const Matrix x_raw = gaussian_matrix(n, spec.ell, structure);

  std::mt19937_64 latent_rng(
      mix_seed(mix_seed(mix_seed(spec.seed, kLatentStream), static_cast<std::uint64_t>(m)), replicate));
  Matrix latent = gaussian_matrix(m - k, r, latent_rng);
  if (spec.coupling == ExactRowCoupling::Disjoint) latent.leftCols(k).setZero();
  if (r_inf < r) latent.rightCols(r - r_inf) *= std::pow(static_cast<double>(m), -0.25);

  Matrix a_bar(m, n);
  a_bar.topRows(k) = row_basis.topRows(k);
  a_bar.bottomRows(m - k) = latent * row_basis;
  return make_ground_truth(spec, std::move(a_bar), x_raw);
}

ProblemInstance add_noise(const GroundTruth& gt, std::uint64_t noise_seed) {
  Matrix a = gt.a_bar;
  Matrix b = gt.b_bar;
  const double sigma = gt.spec.sigma;
  if (sigma > 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> normal(0.0, sigma);
    const double half_width = sigma * std::sqrt(3.0);
    std::uniform_real_distribution<double> uniform(-half_width, half_width);
    auto draw = [&]() { return gt.spec.noise == NoiseKind::Gaussian ? normal(rng) : uniform(rng); };
    for (Index i = gt.k(); i < a.rows(); ++i) {
      for (Index j = 0; j < a.cols(); ++j) a(i, j) += draw();
      for (Index j = 0; j < b.cols(); ++j) b(i, j) += draw();
    }
  }
  return ProblemInstance{std::move(a), std::move(b), gt.k()};
}

Matrix solution_set_member(const GroundTruth& gt, const Matrix& l) {
  if (l.rows() != gt.w.cols() || l.cols() != gt.ell()) {
    throw Error(ErrorCode::ShapeMismatch,
                "L must be " + dims(gt.w.cols(), gt.ell()) + ", got " + dims(l.rows(), l.cols()));
  }
  return gt.x_min + gt.w * l;
}

NoiselessReference noiseless_reference(const GroundTruth& gt) {
  NoiselessReference ref;
  ref.p = solvers::build_P(gt.a1(), gt.b1());
  ref.g_bar = solvers::form_G(gt.c2_bar(), ref.p);
  ref.t_hat = ref.g_bar / static_cast<double>(gt.m());
  const auto eig = numerics::sym_eig_ascending(ref.g_bar);
  const Index null_dim = gt.n() + gt.ell() - gt.spec.r;
  ref.v_bar = eig.vectors.leftCols(null_dim);
  ref.z_bar = ref.p * ref.v_bar;
  return ref;
}

}  // namespace eivtls::model
