#pragma once

#include "saddle/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

namespace saddle {

enum class ProblemKind { kQuadratic, kBilinear, kMinty };

std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem_kind(std::string_view name);

/// f(x, y) = 1/2 x'Ax + x'By - 1/2 y'Cy + a'x - c'y.
struct QuadraticBlocks {
  Matrix A;
  Matrix B;
  Matrix C;
  Vector a;
  Vector c;
};

/// f(x, y) = coupling * x * y + g(x) - g(y),  g(u) = u^2/2 - kappa * cos(u).
struct MintyParams {
  double coupling = 1.0;
  double kappa = 2.0;
};

/// Stochastic saddle-point oracle bundle. Immutable after construction.
///
/// The stochastic gradient is F(z) + zeta / sqrt(b): zeta has independent
/// N(0, sigma^2) coordinates clipped to [-10 sigma, 10 sigma]. Hessian blocks
/// do not depend on the sample.
class SaddleProblem {
 public:
  ProblemKind kind() const { return kind_; }
  Eigen::Index dim_x() const { return dim_x_; }
  Eigen::Index dim_y() const { return dim_y_; }
  Eigen::Index dim() const { return dim_x_ + dim_y_; }

  /// Strong-monotonicity modulus (0 when only monotone or minty).
  double mu() const { return mu_; }
  /// Lipschitz constant of F.
  double smoothness() const { return smoothness_; }
  double sigma() const { return sigma_; }
  /// Upper bound on ||zeta|| (before the 1/sqrt(b) factor).
  double noise_bound() const;
  std::uint64_t seed() const { return seed_; }
  /// Synthetic cost: extra evaluations of F performed inside every
  /// stochastic gradient call. Results are unaffected.
  int oracle_work() const { return oracle_work_; }

  const std::optional<PointPair>& solution() const { return z_star_; }
  bool has_blocks() const { return kind_ != ProblemKind::kMinty; }
  const QuadraticBlocks& blocks() const;
  const MintyParams& minty() const;

  SaddleProblem with_noise(double sigma) const;
  SaddleProblem with_oracle_work(int extra_evaluations) const;
  /// Copy recording `seed` as the generator seed (metadata only).
  SaddleProblem with_seed(std::uint64_t seed) const;
  /// Copy reporting (mu, L) instead of the stored constants. They must bound
  /// the certified ones: mu <= mu_hat and L >= L_hat (relative slack 1e-9).
  SaddleProblem with_constants(double mu, double smoothness) const;

  double value(const PointPair& z) const;
  /// Exact F(z); not counted as an oracle call (calls = 0).
  FieldValue field(const PointPair& z) const;
  /// One stochastic oracle call (calls = 1); pure in (z, sample).
  FieldValue gradient(const PointPair& z, const OracleSample& sample) const;
  /// (grad_xx f * vx, grad_yy f * vy).
  std::pair<Vector, Vector> hvp(const PointPair& z, const Vector& vx,
                                const Vector& vy,
                                const OracleSample& sample) const;

  /// Diagonal blocks of the Hessian at z.
  std::pair<Vector, Vector> hessian_diagonal(const PointPair& z) const;

  /// Constants recomputed from the matrices: (min eigenvalue of
  /// blockdiag(A, C), operator norm of the Jacobian of F). Block kinds only.
  std::pair<double, double> certified_constants() const;

  void check_point(const PointPair& z) const;

 private:
  friend struct ProblemFactory;

  SaddleProblem() = default;

  ProblemKind kind_ = ProblemKind::kQuadratic;
  Eigen::Index dim_x_ = 0;
  Eigen::Index dim_y_ = 0;
  double mu_ = 0.0;
  double smoothness_ = 0.0;
  double sigma_ = 0.0;
  std::uint64_t seed_ = 0;
  int oracle_work_ = 0;
  QuadraticBlocks blocks_;
  MintyParams minty_;
  std::optional<PointPair> z_star_;
};

/// Random strongly-monotone quadratic with mu <= spectrum and ||J|| = L.
SaddleProblem make_quadratic(Eigen::Index dim_x, Eigen::Index dim_y, double mu,
                             double smoothness, std::uint64_t seed,
                             double sigma = 0.0);

/// Quadratic from explicit blocks; mu and L are computed from the matrices.
/// With require_monotone = false, indefinite A or C are accepted (mu = 0).
SaddleProblem make_custom_quadratic(QuadraticBlocks blocks, double sigma = 0.0,
                                    bool require_monotone = true);

/// f = x'By with square B of largest singular value L; z* = 0.
SaddleProblem make_bilinear(Eigen::Index dim, double smoothness,
                            std::uint64_t seed, double sigma = 0.0);
SaddleProblem make_bilinear_from(Matrix B, double sigma = 0.0);

/// Non-monotone 1+1 problem satisfying the minty condition around z* = 0.
/// Certified on a 1000 x 1000 grid of [-10, 10]^2 before being returned.
SaddleProblem make_minty(std::uint64_t seed, double sigma = 0.0);
SaddleProblem make_minty_from(MintyParams params, double sigma = 0.0);

/// True iff <F(z), z - z*> >= -1e-12 on a uniform grid_n x grid_n grid over
/// the box of half-width `radius` around z*. Requires d_x = d_y = 1.
bool verify_minty(const SaddleProblem& problem, double radius, int grid_n);

/// Solves the stationarity system of a quadratic or bilinear problem.
PointPair solve_exact(const SaddleProblem& problem);

}  // namespace saddle
