#include "saddle/precond.hpp"

#include "saddle/errors.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <string>

namespace saddle {

namespace {

void warn_once(const char* message) {
  static std::atomic<bool> warned{false};
  if (!warned.exchange(true)) std::clog << "warning: " << message << '\n';
}

[[noreturn]] void unknown(std::string_view what, std::string_view value) {
  throw InvalidParameters("unknown " + std::string(what) + " '" +
                          std::string(value) + "'");
}

}  // namespace

std::string_view to_string(EmaRule v) {
  return v == EmaRule::kSquared ? "squared-ema" : "additive-ema";
}
std::string_view to_string(CurvatureSource v) {
  return v == CurvatureSource::kGradSquare ? "grad-square" : "hutchinson";
}
std::string_view to_string(BetaSchedule v) {
  return v == BetaSchedule::kConstant ? "constant-beta" : "adam-debias";
}
std::string_view to_string(ClipMode v) {
  return v == ClipMode::kMax ? "max" : "abs-plus";
}

EmaRule parse_ema_rule(std::string_view s) {
  if (s == "squared-ema") return EmaRule::kSquared;
  if (s == "additive-ema") return EmaRule::kAdditive;
  unknown("rule", s);
}
CurvatureSource parse_curvature_source(std::string_view s) {
  if (s == "grad-square") return CurvatureSource::kGradSquare;
  if (s == "hutchinson") return CurvatureSource::kHutchinson;
  unknown("curvature source", s);
}
BetaSchedule parse_beta_schedule(std::string_view s) {
  if (s == "constant-beta") return BetaSchedule::kConstant;
  if (s == "adam-debias") return BetaSchedule::kAdamDebias;
  unknown("beta schedule", s);
}
ClipMode parse_clip_mode(std::string_view s) {
  if (s == "max") return ClipMode::kMax;
  if (s == "abs-plus") return ClipMode::kAbsPlus;
  unknown("clip mode", s);
}

ScalingState ScalingState::adam(double beta, double floor_e) {
  ScalingState s;
  s.rule = EmaRule::kSquared;
  s.source = CurvatureSource::kGradSquare;
  s.schedule = BetaSchedule::kAdamDebias;
  s.beta = beta;
  s.floor_e = floor_e;
  return s;
}

ScalingState ScalingState::rmsprop(double beta, double floor_e) {
  ScalingState s = adam(beta, floor_e);
  s.schedule = BetaSchedule::kConstant;
  return s;
}

ScalingState ScalingState::adahessian(double beta, double floor_e) {
  ScalingState s;
  s.rule = EmaRule::kSquared;
  s.source = CurvatureSource::kHutchinson;
  s.schedule = BetaSchedule::kAdamDebias;
  s.beta = beta;
  s.floor_e = floor_e;
  return s;
}

ScalingState ScalingState::oasis(double beta, double floor_e) {
  ScalingState s;
  s.rule = EmaRule::kAdditive;
  s.source = CurvatureSource::kHutchinson;
  s.schedule = BetaSchedule::kConstant;
  s.beta = beta;
  s.floor_e = floor_e;
  return s;
}

ScalingState ScalingState::identity() {
  ScalingState s = rmsprop(1.0, 1.0);
  return s;
}

ScalingState ScalingState::preset(std::string_view name) {
  if (name == "adam") return adam();
  if (name == "rmsprop") return rmsprop();
  if (name == "adahessian") return adahessian();
  if (name == "oasis") return oasis();
  if (name == "identity") return identity();
  unknown("scaling preset", name);
}

ScalingState ScalingState::initialized(Eigen::Index dim_x,
                                       Eigen::Index dim_y) const {
  ScalingState s = *this;
  s.raw_x = Vector::Zero(dim_x);
  s.raw_y = Vector::Zero(dim_y);
  s.clipped_x = clip_diagonal(s.raw_x, s);
  s.clipped_y = clip_diagonal(s.raw_y, s);
  s.t = 0;
  s.last_fired = false;
  return s;
}

void ScalingState::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw InvalidParameters("beta must lie in [0, 1]");
  if (!(floor_e > 0.0) || !std::isfinite(floor_e))
    throw InvalidParameters("floor e must be > 0");
  if (!(update_prob > 0.0 && update_prob <= 1.0))
    throw InvalidParameters("update probability must lie in (0, 1]");
  if (update_every_k < 0)
    throw InvalidParameters("update_every_k must be >= 0");
  if (update_every_k > 0 && update_prob < 1.0)
    throw InvalidParameters(
        "update_every_k and update probability < 1 are mutually exclusive");
}

double ScalingState::min_clipped() const {
  double m = std::numeric_limits<double>::infinity();
  if (clipped_x.size()) m = std::min(m, clipped_x.minCoeff());
  if (clipped_y.size()) m = std::min(m, clipped_y.minCoeff());
  return m;
}

double ScalingState::max_clipped() const {
  double m = -std::numeric_limits<double>::infinity();
  if (clipped_x.size()) m = std::max(m, clipped_x.maxCoeff());
  if (clipped_y.size()) m = std::max(m, clipped_y.maxCoeff());
  return m;
}

Vector ScalingState::diag_x() const {
  return rule == EmaRule::kSquared ? Vector(raw_x.cwiseSqrt()) : raw_x;
}

Vector ScalingState::diag_y() const {
  return rule == EmaRule::kSquared ? Vector(raw_y.cwiseSqrt()) : raw_y;
}

double beta_t(BetaSchedule schedule, double beta, std::int64_t t) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw InvalidParameters("beta must lie in [0, 1]");
  if (t < 0) throw InvalidParameters("t must be >= 0");
  if (schedule == BetaSchedule::kConstant) return beta;
  if (beta == 1.0) {
    warn_once("adam-debias schedule with beta = 1 is 0/0; using beta_t = 1");
    return 1.0;
  }
  const double power = std::pow(beta, static_cast<double>(t + 1));
  const double value = (beta - power) / (1.0 - power);
  return std::clamp(value, 0.0, 1.0);
}

CurvatureDiag curvature_grad_square(const FieldValue& g) {
  return {g.gx.cwiseAbs2(), g.gy_neg.cwiseAbs2()};
}

CurvatureDiag curvature_hutchinson(const SaddleProblem& problem,
                                   const PointPair& z,
                                   const OracleSample& sample,
                                   RngStream& rademacher) {
  Vector vx(problem.dim_x());
  Vector vy(problem.dim_y());
  for (Eigen::Index i = 0; i < vx.size(); ++i) vx(i) = rademacher.rademacher();
  for (Eigen::Index i = 0; i < vy.size(); ++i) vy(i) = rademacher.rademacher();
  auto [hx, hy] = problem.hvp(z, vx, vy, sample);
  return {vx.cwiseProduct(hx), vy.cwiseProduct(hy)};
}

CurvatureDiag curvature_for(const ScalingState& state,
                            const SaddleProblem& problem, const PointPair& z,
                            const OracleSample& sample, const FieldValue& g,
                            RngStream& rademacher) {
  if (state.source == CurvatureSource::kGradSquare) {
    CurvatureDiag h = curvature_grad_square(g);
    if (state.rule == EmaRule::kAdditive) {
      // Additive rule consumes H itself: |g| is the square root of g .* g.
      h.hx = h.hx.cwiseSqrt();
      h.hy = h.hy.cwiseSqrt();
    }
    return h;
  }
  CurvatureDiag h = curvature_hutchinson(problem, z, sample, rademacher);
  if (state.rule == EmaRule::kSquared) {
    h.hx = h.hx.cwiseAbs2();
    h.hy = h.hy.cwiseAbs2();
  }
  return h;
}

Vector clip_diagonal(const Vector& raw, const ScalingState& state) {
  const Vector d = state.rule == EmaRule::kSquared ? Vector(raw.cwiseSqrt())
                                                   : Vector(raw.cwiseAbs());
  if (state.clip == ClipMode::kMax) return d.cwiseMax(state.floor_e);
  return d.array() + state.floor_e;
}

bool apply_update(ScalingState& state, const CurvatureDiag& h,
                  RngStream& skip_stream) {
  if (!state.is_initialized())
    throw PreconditionError("scaling state is not initialized");
  if (h.hx.size() != state.raw_x.size() || h.hy.size() != state.raw_y.size())
    throw DimensionMismatch("curvature shape does not match scaling state");
  if (state.rule == EmaRule::kSquared &&
      ((h.hx.size() && h.hx.minCoeff() < 0.0) ||
       (h.hy.size() && h.hy.minCoeff() < 0.0)))
    throw PreconditionError("squared rule needs non-negative curvature");

  bool fire = true;
  if (state.update_every_k > 0)
    fire = state.t % state.update_every_k == 0;
  else if (state.update_prob < 1.0)
    fire = skip_stream.bernoulli(state.update_prob);

  if (fire) {
    const double b = beta_t(state.schedule, state.beta, state.t);
    state.raw_x = b * state.raw_x + (1.0 - b) * h.hx;
    state.raw_y = b * state.raw_y + (1.0 - b) * h.hy;
    state.clipped_x = clip_diagonal(state.raw_x, state);
    state.clipped_y = clip_diagonal(state.raw_y, state);
  }
  state.last_fired = fire;
  ++state.t;
  return fire;
}

ScalingState update(ScalingState state, const CurvatureDiag& h,
                    RngStream& skip_stream) {
  apply_update(state, h, skip_stream);
  return state;
}

FieldValue apply_inverse(const ScalingState& state, const FieldValue& g) {
  if (g.gx.size() != state.clipped_x.size() ||
      g.gy_neg.size() != state.clipped_y.size())
    throw DimensionMismatch("gradient shape does not match scaling state");
  return {g.gx.cwiseQuotient(state.clipped_x),
          g.gy_neg.cwiseQuotient(state.clipped_y), g.calls};
}

double gamma_bound(CurvatureSource source, const SaddleProblem& problem,
                   std::optional<double> region_radius) {
  if (source == CurvatureSource::kHutchinson)
    return std::sqrt(static_cast<double>(problem.dim())) * problem.smoothness();
  if (!region_radius || !std::isfinite(*region_radius) || *region_radius < 0.0)
    throw PreconditionError(
        "grad-square bound needs a finite region radius around z*");
  if (!problem.solution())
    throw PreconditionError("grad-square bound needs a known solution");
  // F is L-Lipschitz, so on the ball ||F(z)|| <= ||F(z*)|| + L r; the clipped
  // noise adds at most its norm bound.
  const double at_solution = std::sqrt(problem.field(*problem.solution()).squared_norm());
  return at_solution + problem.smoothness() * *region_radius +
         problem.noise_bound();
}

double growth_factor(const ScalingState& state, double gamma) {
  if (gamma < state.floor_e)
    throw PreconditionError("Gamma must be >= the floor e");
  const double one_minus = 1.0 - beta_t(state.schedule, state.beta, state.t);
  const double e = state.floor_e;
  const double p = state.update_prob;
  if (state.rule == EmaRule::kSquared)
    return 1.0 + one_minus * p * gamma * gamma / (2.0 * e * e);
  return 1.0 + 2.0 * one_minus * p * gamma / e;
}

}  // namespace saddle
