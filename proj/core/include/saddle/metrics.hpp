#pragma once

#include "saddle/optim.hpp"
#include "saddle/precond.hpp"
#include "saddle/problems.hpp"
#include "saddle/records.hpp"
#include "saddle/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace saddle {

/// sum_i clipped_i (z_i - z*_i)^2 over both blocks.
double weighted_dist_sq(const PointPair& z, const PointPair& z_star,
                        const ScalingState& scaling);

/// Restricted gap max_{||y'|| <= omega} f(x, y') - min_{||x'|| <= omega}
/// f(x', y) for quadratic and bilinear problems.
///
/// The inner problems are trust-region subproblems with a positive
/// semidefinite Hessian; they are solved on the eigenbasis by bisection on
/// the secular equation, to 1e-10 or better. Construct once, evaluate many
/// times.
class GapEvaluator {
 public:
  GapEvaluator(const SaddleProblem& problem, double omega);

  static bool supports(const SaddleProblem& problem);

  double operator()(const PointPair& z) const;
  double omega() const { return omega_; }

 private:
  struct BallQuadratic {
    Matrix eigenvectors;
    Vector eigenvalues;
  };
  // min over ||u|| <= omega of 1/2 u'Pu + q'u.
  double minimize(const BallQuadratic& p, const Vector& q) const;

  const SaddleProblem* problem_;
  double omega_;
  bool bilinear_;
  BallQuadratic x_side_;
  BallQuadratic y_side_;
};

double gap_restricted(const SaddleProblem& problem, const PointPair& z_avg,
                      double omega);

/// Omega = 2 max_t ||z_t - z*|| + ||z*|| from the recorded distances.
double gap_radius(const Trajectory& traj, const SaddleProblem& problem);

struct ContractionViolation {
  std::int64_t t;
  double lhs;
  double rhs;
};

struct ContractionReport {
  bool passed = true;
  std::int64_t steps_checked = 0;
  double gamma_bound = 0.0;
  /// Largest per-step factor 1 - gamma mu / Gamma + (1 - beta_{t+1}) C seen.
  double max_factor = 0.0;
  std::optional<ContractionViolation> first_violation;
};

/// Checks R^2_{t+1} <= (1 - gamma mu / Gamma + (1 - beta_{t+1}) C) R^2_t +
/// 1e-10 R^2_0 on every consecutive pair of records. Only meaningful on
/// deterministic (sigma = 0), always-updating (p = 1) extragrad runs on a
/// strongly monotone problem; anything else is a precondition error.
ContractionReport contraction_check(const Trajectory& traj,
                                    const SaddleProblem& problem,
                                    const OptimizerConfig& config);

enum class FitMode { kLinear, kLogLog };

struct FitOptions {
  FitMode mode = FitMode::kLinear;
  /// Fit only the last `window` points after burn-in (0 = all).
  std::size_t window = 0;
  /// Leading fraction of points discarded before fitting.
  double burn_in_fraction = 0.1;
  /// x-values; defaults to 0, 1, ... (linear) or 1, 2, ... (log-log).
  std::vector<double> abscissa;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
  /// Some values were <= 1e-300 and were floored before taking logs.
  bool floored = false;
};

/// Least-squares slope of log(value) against x (linear) or log(x) (log-log).
FitResult fit_rate(std::span<const double> series, const FitOptions& options);

/// (1 - 1/T)^sqrt(T) <= 1 - 1/(2 sqrt(T)) + 1e-15.
bool check_scalar_lemma(std::int64_t T);

/// Median of the trailing `tail_fraction` of the series.
double noise_floor(std::span<const double> series, double tail_fraction = 0.2);

}  // namespace saddle
