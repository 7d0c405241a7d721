#pragma once

#include "saddle/problems.hpp"
#include "saddle/rng.hpp"
#include "saddle/types.hpp"

#include <optional>
#include <string_view>

namespace saddle {

/// squared: D^2 <- beta_t D^2 + (1 - beta_t) H^2;  additive: D <- beta_t D +
/// (1 - beta_t) H.
enum class EmaRule { kSquared, kAdditive };
/// Where the diagonal curvature comes from: squared stochastic gradients
/// (Adam, RMSProp) or a Rademacher/Hessian-vector estimate (AdaHessian, OASIS).
enum class CurvatureSource { kGradSquare, kHutchinson };
enum class BetaSchedule { kConstant, kAdamDebias };
/// kMax: max(e, |D|);  kAbsPlus: |D| + e.
enum class ClipMode { kMax, kAbsPlus };

std::string_view to_string(EmaRule v);
std::string_view to_string(CurvatureSource v);
std::string_view to_string(BetaSchedule v);
std::string_view to_string(ClipMode v);
EmaRule parse_ema_rule(std::string_view s);
CurvatureSource parse_curvature_source(std::string_view s);
BetaSchedule parse_beta_schedule(std::string_view s);
ClipMode parse_clip_mode(std::string_view s);

/// Diagonal curvature for one update. Entries of H^2 for the squared rule
/// (non-negative), signed entries of H for the additive rule.
struct CurvatureDiag {
  Vector hx;
  Vector hy;
};

/// Diagonal preconditioner state.
///
/// `raw_*` holds D^2 for the squared rule and D for the additive rule;
/// `clipped_*` always holds the diagonal of D-hat used to scale gradients.
/// `t` counts update opportunities (fired or skipped).
struct ScalingState {
  EmaRule rule = EmaRule::kAdditive;
  CurvatureSource source = CurvatureSource::kHutchinson;
  BetaSchedule schedule = BetaSchedule::kConstant;
  ClipMode clip = ClipMode::kMax;
  double beta = 0.999;
  double floor_e = 0.01;
  double update_prob = 1.0;
  /// When > 0, updates fire deterministically on every k-th opportunity
  /// (t % k == 0). Mutually exclusive with update_prob < 1.
  int update_every_k = 0;

  Vector raw_x;
  Vector raw_y;
  Vector clipped_x;
  Vector clipped_y;
  std::int64_t t = 0;
  bool last_fired = false;

  static ScalingState adam(double beta = 0.999, double floor_e = 1e-8);
  static ScalingState rmsprop(double beta = 0.999, double floor_e = 1e-8);
  static ScalingState adahessian(double beta = 0.999, double floor_e = 0.01);
  static ScalingState oasis(double beta = 0.999, double floor_e = 0.01);
  /// D-hat = I forever: frozen (beta = 1), zero curvature memory, e = 1.
  static ScalingState identity();
  static ScalingState preset(std::string_view name);

  /// Copy with zeroed raw diagonals sized for the problem, t = 0.
  ScalingState initialized(Eigen::Index dim_x, Eigen::Index dim_y) const;
  bool is_initialized() const { return clipped_x.size() + clipped_y.size() > 0; }

  /// Throws InvalidParameters for out-of-range hyperparameters.
  void validate() const;

  double min_clipped() const;
  double max_clipped() const;
  /// Unsquared raw diagonal D (sqrt of the stored value for the squared rule).
  Vector diag_x() const;
  Vector diag_y() const;
};

/// beta_t for the schedule: constant -> beta; Adam -> (beta - beta^{t+1}) /
/// (1 - beta^{t+1}); the 0/0 at beta = 1 resolves to 1.
double beta_t(BetaSchedule schedule, double beta, std::int64_t t);

CurvatureDiag curvature_grad_square(const FieldValue& g);

/// v .* (H v) per block with Rademacher v drawn from `rademacher`.
CurvatureDiag curvature_hutchinson(const SaddleProblem& problem,
                                   const PointPair& z,
                                   const OracleSample& sample,
                                   RngStream& rademacher);

/// Curvature in the form the state's rule expects (squares the Hutchinson
/// estimate for the squared rule).
CurvatureDiag curvature_for(const ScalingState& state,
                            const SaddleProblem& problem, const PointPair& z,
                            const OracleSample& sample, const FieldValue& g,
                            RngStream& rademacher);

/// Entrywise clipping of the raw state into D-hat.
Vector clip_diagonal(const Vector& raw, const ScalingState& state);

/// One update opportunity in place. The Bernoulli draw (only made when
/// 0 < p < 1) comes from `skip_stream`. Returns whether the rule fired.
bool apply_update(ScalingState& state, const CurvatureDiag& h,
                  RngStream& skip_stream);

ScalingState update(ScalingState state, const CurvatureDiag& h,
                    RngStream& skip_stream);

/// D-hat^{-1} g entrywise; the call counter is preserved.
FieldValue apply_inverse(const ScalingState& state, const FieldValue& g);

/// Bound Gamma on curvature inputs. Hutchinson: sqrt(d_x + d_y) L.
/// Grad-square: sup of ||grad f(z, xi)|| over the ball of `region_radius`
/// around z*, which must be given.
double gamma_bound(CurvatureSource source, const SaddleProblem& problem,
                   std::optional<double> region_radius = std::nullopt);

/// Worst-case one-step growth of D-hat for the next update opportunity:
/// 1 + (1 - beta_t) p Gamma^2 / (2 e^2) (squared) or 1 + 2 (1 - beta_t) p
/// Gamma / e (additive), with beta_t taken at the state's counter.
double growth_factor(const ScalingState& state, double gamma);

}  // namespace saddle
