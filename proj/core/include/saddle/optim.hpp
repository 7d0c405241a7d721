#pragma once

#include "saddle/errors.hpp"
#include "saddle/precond.hpp"
#include "saddle/problems.hpp"
#include "saddle/records.hpp"
#include "saddle/rng.hpp"
#include "saddle/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace saddle {

enum class Method { kExtragrad, kSingleCallMomentum, kSgda };

/// Which step-size bound the theory-safe gate enforces for extragrad.
enum class TheoryRegime { kStronglyMonotone, kMonotone, kMinty };

std::string_view to_string(Method m);
std::string_view to_string(TheoryRegime r);
Method parse_method(std::string_view s);
TheoryRegime parse_regime(std::string_view s);

struct Averaging {
  enum class Kind { kNone, kUniform, kEma };
  Kind kind = Kind::kUniform;
  double lambda = 0.999;
};

struct OptimizerConfig {
  Method method = Method::kExtragrad;
  /// Required unless theory_safe, where it defaults to e / (10 L).
  std::optional<double> gamma;
  /// Negative-momentum weight (single-call only).
  double eta = 0.0;
  /// Probability of refreshing the anchor w (single-call only).
  double anchor_prob = 1.0;
  ScalingState scaling = ScalingState::oasis();
  std::int64_t iterations = 0;
  std::uint64_t seed = 42;
  int batch = 1;
  Averaging averaging;
  bool theory_safe = false;
  TheoryRegime regime = TheoryRegime::kStronglyMonotone;
  /// Radius of the balls for the per-record restricted gap.
  std::optional<double> gap_omega;
  /// Keep every averaged iterate in the trajectory.
  bool keep_iterates = false;
  double divergence_threshold = 1e12;
};

/// gamma after applying the theory-safe default.
double resolved_gamma(const OptimizerConfig& config,
                      const SaddleProblem& problem);

/// Throws InvalidParameters when the config is malformed or violates the
/// theory-safe gates for this problem.
void validate(const OptimizerConfig& config, const SaddleProblem& problem);

struct Trajectory {
  std::vector<RunRecord> records;
  PointPair initial_z;
  PointPair final_z;
  PointPair final_avg_uniform;
  PointPair final_avg_ema;
  /// Averaged iterates (z_{t+1/2}; z_{t+1} for sgda), when kept.
  std::vector<PointPair> averaged_iterates;
  ScalingState final_scaling;
  std::int64_t grad_calls = 0;
  std::int64_t hvp_calls = 0;
  /// Largest distance to z* of any point where the oracle was queried.
  double max_oracle_dist = 0.0;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Trajectory partial, std::int64_t t)
      : Error(what), partial_(std::move(partial)), t_(t) {}
  const Trajectory& partial() const { return partial_; }
  std::int64_t iteration() const { return t_; }

 private:
  Trajectory partial_;
  std::int64_t t_;
};

/// Independent named random streams of one run.
struct RunStreams {
  RngStream noise;
  RngStream rademacher;
  RngStream anchor;
  RngStream precond_skip;

  explicit RunStreams(std::uint64_t seed)
      : noise(seed, "noise"),
        rademacher(seed, "rademacher"),
        anchor(seed, "anchor"),
        precond_skip(seed, "precond-skip") {}
};

/// Counters and randomness shared by the step functions of one run.
struct StepContext {
  RunStreams streams;
  int batch = 1;
  std::int64_t grad_calls = 0;
  std::int64_t hvp_calls = 0;
  double max_oracle_dist = 0.0;
  const PointPair* z_star = nullptr;

  StepContext(std::uint64_t seed, int batch_size)
      : streams(seed), batch(batch_size) {}

  OracleSample next_sample() { return {streams.noise.next_u64(), batch}; }
};

struct StepResult {
  PointPair next;
  PointPair half;
};

/// One iteration of scaled stochastic extragradient. Refreshes `scaling` from
/// the batch of the extrapolation gradient, then uses the same D-hat for both
/// half-steps. Exactly two gradient calls.
StepResult step_extragrad(StepContext& ctx, const SaddleProblem& problem,
                          const PointPair& z, ScalingState& scaling,
                          double gamma);

/// State carried between single-call iterations.
struct SingleCallCache {
  PointPair anchor;        // w_t
  PointPair last_half;     // z_{t-1/2}
  OracleSample last_sample;
  FieldValue last_grad;    // g_{t-1/2}
  bool refresh_pending = false;
};

/// z_{-1/2} = z0, one gradient call at z0, D-hat built from the same batch,
/// w_0 = z0.
SingleCallCache warm_start_single_call(StepContext& ctx,
                                       const SaddleProblem& problem,
                                       const PointPair& z0,
                                       ScalingState& scaling);

/// One iteration of single-call extragradient with negative momentum: the
/// extrapolation reuses the cached gradient, one fresh call at the
/// extrapolated point, momentum pull eta D-hat^{-1} (w - z), anchor refresh
/// with probability anchor_prob.
StepResult step_single_call(StepContext& ctx, const SaddleProblem& problem,
                            const PointPair& z, SingleCallCache& cache,
                            ScalingState& scaling, double gamma, double eta,
                            double anchor_prob);

/// Scaled stochastic gradient descent-ascent; one gradient call.
PointPair step_sgda(StepContext& ctx, const SaddleProblem& problem,
                    const PointPair& z, ScalingState& scaling, double gamma);

struct StepView {
  std::int64_t t;
  const PointPair& z;
  const PointPair& next;
  const PointPair& half;
  const ScalingState& scaling;
};

struct RunHooks {
  /// After every iteration, with the scaling used by that iteration.
  std::function<void(const StepView&)> on_step;
  /// After every record is appended.
  std::function<void(const RunRecord&)> on_record;
};

/// Runs config.iterations steps from z0. Throws DivergenceError (carrying
/// the partial trajectory) when an iterate leaves the finite range or its
/// norm exceeds config.divergence_threshold.
Trajectory run(const SaddleProblem& problem, const OptimizerConfig& config,
               const PointPair& z0, const RunHooks& hooks = {});

/// z* + radius * u with u uniform on the unit sphere (origin when z* is
/// unknown).
PointPair initial_point(const SaddleProblem& problem, double radius,
                        std::uint64_t seed);

PointPair average_uniform(const Trajectory& traj);
/// a_0 = first averaged iterate, a_{t+1} = lambda a_t + (1 - lambda) z.
PointPair average_ema(const Trajectory& traj, double lambda);

}  // namespace saddle
