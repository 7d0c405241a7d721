#include "saddle/optim.hpp"

#include "saddle/metrics.hpp"

#include <cmath>
#include <random>
#include <string>

namespace saddle {

namespace {

constexpr double kGateSlack = 1.0 + 1e-12;

void scaled_move(PointPair& out, const PointPair& from, double gamma,
                 const FieldValue& scaled) {
  out.x = from.x - gamma * scaled.gx;
  out.y = from.y - gamma * scaled.gy_neg;
}

void track_distance(StepContext& ctx, const PointPair& z) {
  if (ctx.z_star)
    ctx.max_oracle_dist =
        std::max(ctx.max_oracle_dist, std::sqrt(z.squared_distance(*ctx.z_star)));
}

FieldValue query(StepContext& ctx, const SaddleProblem& problem,
                 const PointPair& z, const OracleSample& sample) {
  track_distance(ctx, z);
  FieldValue g = problem.gradient(z, sample);
  ctx.grad_calls += g.calls;
  return g;
}

void refresh(StepContext& ctx, const SaddleProblem& problem,
             ScalingState& scaling, const PointPair& z,
             const OracleSample& sample, const FieldValue& g) {
  const CurvatureDiag h =
      curvature_for(scaling, problem, z, sample, g, ctx.streams.rademacher);
  if (scaling.source == CurvatureSource::kHutchinson) ++ctx.hvp_calls;
  apply_update(scaling, h, ctx.streams.precond_skip);
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kExtragrad:
      return "extragrad";
    case Method::kSingleCallMomentum:
      return "single-call-momentum";
    case Method::kSgda:
      return "sgda";
  }
  return "unknown";
}

std::string_view to_string(TheoryRegime r) {
  switch (r) {
    case TheoryRegime::kStronglyMonotone:
      return "sc";
    case TheoryRegime::kMonotone:
      return "c";
    case TheoryRegime::kMinty:
      return "nc";
  }
  return "unknown";
}

Method parse_method(std::string_view s) {
  if (s == "extragrad") return Method::kExtragrad;
  if (s == "single-call-momentum") return Method::kSingleCallMomentum;
  if (s == "sgda") return Method::kSgda;
  throw InvalidParameters("unknown method '" + std::string(s) + "'");
}

TheoryRegime parse_regime(std::string_view s) {
  if (s == "sc") return TheoryRegime::kStronglyMonotone;
  if (s == "c") return TheoryRegime::kMonotone;
  if (s == "nc") return TheoryRegime::kMinty;
  throw InvalidParameters("unknown theory regime '" + std::string(s) + "'");
}

double resolved_gamma(const OptimizerConfig& config,
                      const SaddleProblem& problem) {
  if (config.gamma) return *config.gamma;
  if (config.theory_safe)
    return config.scaling.floor_e / (10.0 * problem.smoothness());
  throw InvalidParameters("gamma is required unless theory_safe is set");
}

void validate(const OptimizerConfig& config, const SaddleProblem& problem) {
  config.scaling.validate();
  const double gamma = resolved_gamma(config, problem);
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw InvalidParameters("gamma must be finite and >= 0");
  if (config.iterations < 0) throw InvalidParameters("T must be >= 0");
  if (config.batch < 1) throw InvalidParameters("batch must be >= 1");
  if (!(config.eta >= 0.0)) throw InvalidParameters("eta must be >= 0");
  if (!(config.anchor_prob > 0.0 && config.anchor_prob <= 1.0))
    throw InvalidParameters("anchor probability must lie in (0, 1]");
  if (!(config.averaging.lambda >= 0.0 && config.averaging.lambda < 1.0))
    throw InvalidParameters("EMA lambda must lie in [0, 1)");
  if (config.gap_omega && !(*config.gap_omega > 0.0))
    throw InvalidParameters("gap omega must be > 0");
  if (config.scaling.is_initialized() &&
      (config.scaling.clipped_x.size() != problem.dim_x() ||
       config.scaling.clipped_y.size() != problem.dim_y()))
    throw DimensionMismatch("scaling state does not match problem dims");

  if (!config.theory_safe) return;
  const double e = config.scaling.floor_e;
  const double L = problem.smoothness();
  if (config.method == Method::kSingleCallMomentum) {
    if (gamma > kGateSlack * e / (10.0 * L))
      throw InvalidParameters("theory-safe: gamma > e / (10 L)");
    if (config.eta > kGateSlack * e * config.anchor_prob)
      throw InvalidParameters("theory-safe: eta > e p");
    if (config.anchor_prob > 0.25)
      throw InvalidParameters("theory-safe: anchor probability > 1/4");
    return;
  }
  double denom = 4.0;
  if (config.regime == TheoryRegime::kMonotone) denom = 2.0;
  if (config.regime == TheoryRegime::kMinty) denom = 3.0;
  if (gamma > kGateSlack * e / (denom * L))
    throw InvalidParameters("theory-safe: gamma > e / (" +
                            std::to_string(static_cast<int>(denom)) + " L)");
}

StepResult step_extragrad(StepContext& ctx, const SaddleProblem& problem,
                          const PointPair& z, ScalingState& scaling,
                          double gamma) {
  const OracleSample sample = ctx.next_sample();
  const FieldValue g = query(ctx, problem, z, sample);
  refresh(ctx, problem, scaling, z, sample, g);

  StepResult out;
  scaled_move(out.half, z, gamma, apply_inverse(scaling, g));
  const FieldValue g_half = query(ctx, problem, out.half, ctx.next_sample());
  scaled_move(out.next, z, gamma, apply_inverse(scaling, g_half));
  return out;
}

SingleCallCache warm_start_single_call(StepContext& ctx,
                                       const SaddleProblem& problem,
                                       const PointPair& z0,
                                       ScalingState& scaling) {
  SingleCallCache cache;
  cache.anchor = z0;
  cache.last_half = z0;
  cache.last_sample = ctx.next_sample();
  cache.last_grad = query(ctx, problem, z0, cache.last_sample);
  refresh(ctx, problem, scaling, z0, cache.last_sample, cache.last_grad);
  cache.refresh_pending = false;
  return cache;
}

StepResult step_single_call(StepContext& ctx, const SaddleProblem& problem,
                            const PointPair& z, SingleCallCache& cache,
                            ScalingState& scaling, double gamma, double eta,
                            double anchor_prob) {
  // D-hat_{t-1/2} comes from the batch of the cached gradient.
  if (cache.refresh_pending) {
    refresh(ctx, problem, scaling, cache.last_half, cache.last_sample,
            cache.last_grad);
    cache.refresh_pending = false;
  }

  StepResult out;
  scaled_move(out.half, z, gamma, apply_inverse(scaling, cache.last_grad));
  const OracleSample sample = ctx.next_sample();
  const FieldValue g_half = query(ctx, problem, out.half, sample);

  const FieldValue pull = apply_inverse(
      scaling, FieldValue{cache.anchor.x - z.x, cache.anchor.y - z.y, 0});
  const FieldValue step = apply_inverse(scaling, g_half);
  out.next.x = z.x + eta * pull.gx - gamma * step.gx;
  out.next.y = z.y + eta * pull.gy_neg - gamma * step.gy_neg;

  if (ctx.streams.anchor.bernoulli(anchor_prob)) cache.anchor = z;
  cache.last_half = out.half;
  cache.last_sample = sample;
  cache.last_grad = g_half;
  cache.refresh_pending = true;
  return out;
}

PointPair step_sgda(StepContext& ctx, const SaddleProblem& problem,
                    const PointPair& z, ScalingState& scaling, double gamma) {
  const OracleSample sample = ctx.next_sample();
  const FieldValue g = query(ctx, problem, z, sample);
  refresh(ctx, problem, scaling, z, sample, g);
  PointPair next;
  scaled_move(next, z, gamma, apply_inverse(scaling, g));
  return next;
}

Trajectory run(const SaddleProblem& problem, const OptimizerConfig& config,
               const PointPair& z0, const RunHooks& hooks) {
  validate(config, problem);
  problem.check_point(z0);
  const double gamma = resolved_gamma(config, problem);
  const std::optional<PointPair>& z_star = problem.solution();

  std::optional<GapEvaluator> gap;
  if (config.gap_omega && GapEvaluator::supports(problem))
    gap.emplace(problem, *config.gap_omega);

  StepContext ctx(config.seed, config.batch);
  if (z_star) ctx.z_star = &*z_star;

  ScalingState scaling =
      config.scaling.is_initialized()
          ? config.scaling
          : config.scaling.initialized(problem.dim_x(), problem.dim_y());

  Trajectory traj;
  traj.initial_z = z0;
  traj.records.reserve(static_cast<std::size_t>(config.iterations));

  PointPair z = z0;
  PointPair sum = PointPair::zeros(problem.dim_x(), problem.dim_y());
  PointPair ema = z0;
  std::int64_t averaged = 0;
  const double lambda = config.averaging.lambda;

  std::optional<SingleCallCache> cache;
  if (config.method == Method::kSingleCallMomentum && config.iterations > 0)
    cache = warm_start_single_call(ctx, problem, z0, scaling);

  auto current_average = [&]() -> PointPair {
    if (averaged == 0) return z0;
    if (config.averaging.kind == Averaging::Kind::kEma) return ema;
    return {sum.x / static_cast<double>(averaged),
            sum.y / static_cast<double>(averaged)};
  };

  auto finish = [&](Trajectory& out) {
    out.final_z = z;
    out.final_avg_uniform =
        averaged == 0 ? z0
                      : PointPair{sum.x / static_cast<double>(averaged),
                                  sum.y / static_cast<double>(averaged)};
    out.final_avg_ema = averaged == 0 ? z0 : ema;
    out.final_scaling = scaling;
    out.grad_calls = ctx.grad_calls;
    out.hvp_calls = ctx.hvp_calls;
    out.max_oracle_dist = ctx.max_oracle_dist;
  };

  for (std::int64_t t = 0; t < config.iterations; ++t) {
    StepResult step;
    switch (config.method) {
      case Method::kExtragrad:
        step = step_extragrad(ctx, problem, z, scaling, gamma);
        break;
      case Method::kSingleCallMomentum:
        step = step_single_call(ctx, problem, z, *cache, scaling, gamma,
                                config.eta, config.anchor_prob);
        break;
      case Method::kSgda:
        step.next = step_sgda(ctx, problem, z, scaling, gamma);
        step.half = step.next;
        break;
    }

    RunRecord rec;
    rec.t = t;
    if (z_star) {
      rec.dist2 = z.squared_distance(*z_star);
      rec.r2_weighted = weighted_dist_sq(z, *z_star, scaling);
    } else {
      rec.dist2 = rec.r2_weighted = std::numeric_limits<double>::quiet_NaN();
    }
    rec.grad_norm2 = problem.field(z).squared_norm();
    rec.dhat_min = scaling.min_clipped();
    rec.dhat_max = scaling.max_clipped();
    rec.grad_calls = ctx.grad_calls;
    if (gap) rec.gap = (*gap)(current_average());

    if (hooks.on_step) hooks.on_step(StepView{t, z, step.next, step.half, scaling});

    const bool finite = step.next.all_finite() && step.half.all_finite();
    if (finite) {
      if (averaged == 0)
        ema = step.half;
      else
        ema = {lambda * ema.x + (1.0 - lambda) * step.half.x,
               lambda * ema.y + (1.0 - lambda) * step.half.y};
      sum.x += step.half.x;
      sum.y += step.half.y;
      ++averaged;
      if (config.keep_iterates) traj.averaged_iterates.push_back(step.half);
    }
    traj.records.push_back(rec);
    if (hooks.on_record) hooks.on_record(traj.records.back());

    if (!finite || step.next.norm() > config.divergence_threshold) {
      finish(traj);
      traj.final_z = z;
      throw DivergenceError("iterate diverged at t = " + std::to_string(t + 1),
                            std::move(traj), t + 1);
    }
    z = std::move(step.next);
  }

  finish(traj);
  return traj;
}

PointPair initial_point(const SaddleProblem& problem, double radius,
                        std::uint64_t seed) {
  RngStream stream(seed, "init");
  std::normal_distribution<double> normal(0.0, 1.0);
  PointPair dir = PointPair::zeros(problem.dim_x(), problem.dim_y());
  for (Eigen::Index i = 0; i < dir.x.size(); ++i) dir.x(i) = normal(stream.engine());
  for (Eigen::Index i = 0; i < dir.y.size(); ++i) dir.y(i) = normal(stream.engine());
  const double n = dir.norm();
  PointPair z = problem.solution()
                    ? *problem.solution()
                    : PointPair::zeros(problem.dim_x(), problem.dim_y());
  z.x += radius / n * dir.x;
  z.y += radius / n * dir.y;
  return z;
}

PointPair average_uniform(const Trajectory& traj) {
  if (traj.averaged_iterates.empty())
    throw PreconditionError("trajectory holds no averaged iterates");
  PointPair sum = PointPair::zeros(traj.averaged_iterates.front().dim_x(),
                                   traj.averaged_iterates.front().dim_y());
  for (const auto& z : traj.averaged_iterates) {
    sum.x += z.x;
    sum.y += z.y;
  }
  const double n = static_cast<double>(traj.averaged_iterates.size());
  return {sum.x / n, sum.y / n};
}

PointPair average_ema(const Trajectory& traj, double lambda) {
  if (traj.averaged_iterates.empty())
    throw PreconditionError("trajectory holds no averaged iterates");
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw InvalidParameters("EMA lambda must lie in [0, 1)");
  PointPair a = traj.averaged_iterates.front();
  for (std::size_t i = 1; i < traj.averaged_iterates.size(); ++i) {
    a.x = lambda * a.x + (1.0 - lambda) * traj.averaged_iterates[i].x;
    a.y = lambda * a.y + (1.0 - lambda) * traj.averaged_iterates[i].y;
  }
  return a;
}

}  // namespace saddle
