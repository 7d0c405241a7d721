#include "saddle/metrics.hpp"

#include "saddle/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace saddle {

double weighted_dist_sq(const PointPair& z, const PointPair& z_star,
                        const ScalingState& scaling) {
  if (z.dim_x() != z_star.dim_x() || z.dim_y() != z_star.dim_y() ||
      scaling.clipped_x.size() != z.dim_x() ||
      scaling.clipped_y.size() != z.dim_y())
    throw DimensionMismatch("weighted_dist_sq: inconsistent dimensions");
  return scaling.clipped_x.dot((z.x - z_star.x).cwiseAbs2()) +
         scaling.clipped_y.dot((z.y - z_star.y).cwiseAbs2());
}

GapEvaluator::GapEvaluator(const SaddleProblem& problem, double omega)
    : problem_(&problem), omega_(omega), bilinear_(false) {
  if (!supports(problem))
    throw CapabilityError("restricted gap needs a quadratic or bilinear problem");
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw InvalidParameters("gap radius omega must be > 0");
  if (!problem.solution())
    throw PreconditionError("restricted gap needs a known solution");
  const PointPair& zs = *problem.solution();
  if (zs.x.norm() > omega || zs.y.norm() > omega)
    throw InvalidParameters(
        "invalid region: the solution lies outside the omega-balls");
  bilinear_ = problem.kind() == ProblemKind::kBilinear;
  if (!bilinear_) {
    const auto& b = problem.blocks();
    Eigen::SelfAdjointEigenSolver<Matrix> ex(b.A);
    Eigen::SelfAdjointEigenSolver<Matrix> ey(b.C);
    x_side_ = {ex.eigenvectors(), ex.eigenvalues().cwiseMax(0.0)};
    y_side_ = {ey.eigenvectors(), ey.eigenvalues().cwiseMax(0.0)};
  }
}

bool GapEvaluator::supports(const SaddleProblem& problem) {
  return problem.has_blocks();
}

double GapEvaluator::minimize(const BallQuadratic& p, const Vector& q) const {
  const Vector qt = p.eigenvectors.transpose() * q;
  const double qnorm = qt.norm();
  if (qnorm == 0.0) return 0.0;
  const Vector& lam = p.eigenvalues;

  // Interior solution when P is invertible on the support of q and the
  // Newton point fits in the ball.
  bool interior = true;
  double norm2 = 0.0;
  double value = 0.0;
  for (Eigen::Index i = 0; i < qt.size(); ++i) {
    if (qt(i) == 0.0) continue;
    if (lam(i) <= 0.0) {
      interior = false;
      break;
    }
    norm2 += qt(i) * qt(i) / (lam(i) * lam(i));
    value -= 0.5 * qt(i) * qt(i) / lam(i);
  }
  if (interior && norm2 <= omega_ * omega_) return value;

  // Boundary: find shift s >= 0 with ||(Lambda + s)^{-1} q|| = omega. The
  // norm is decreasing in s and at s = ||q|| / omega it is <= omega.
  auto step_norm = [&](double s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < qt.size(); ++i) {
      const double u = qt(i) / (lam(i) + s);
      acc += u * u;
    }
    return std::sqrt(acc);
  };
  double lo = 0.0, hi = qnorm / omega_;
  for (int it = 0; it < 300 && hi - lo > 1e-17 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (step_norm(mid) > omega_)
      lo = mid;
    else
      hi = mid;
  }
  value = 0.0;
  for (Eigen::Index i = 0; i < qt.size(); ++i) {
    const double u = -qt(i) / (lam(i) + hi);
    value += 0.5 * lam(i) * u * u + qt(i) * u;
  }
  return value;
}

double GapEvaluator::operator()(const PointPair& z) const {
  problem_->check_point(z);
  const auto& b = problem_->blocks();
  if (bilinear_)
    return omega_ * (b.B.transpose() * z.x).norm() + omega_ * (b.B * z.y).norm();
  // max_y' f(x, y') = 1/2 x'Ax + a'x - min_y' [1/2 y'Cy' + (c - B'x)'y']
  const double best_response_y =
      0.5 * z.x.dot(b.A * z.x) + b.a.dot(z.x) -
      minimize(y_side_, b.c - b.B.transpose() * z.x);
  // min_x' f(x', y) = min_x' [1/2 x'Ax' + (By + a)'x'] - 1/2 y'Cy - c'y
  const double best_response_x = minimize(x_side_, b.B * z.y + b.a) -
                                 0.5 * z.y.dot(b.C * z.y) - b.c.dot(z.y);
  return best_response_y - best_response_x;
}

double gap_restricted(const SaddleProblem& problem, const PointPair& z_avg,
                      double omega) {
  return GapEvaluator(problem, omega)(z_avg);
}

double gap_radius(const Trajectory& traj, const SaddleProblem& problem) {
  if (!problem.solution())
    throw PreconditionError("gap radius needs a known solution");
  const PointPair& zs = *problem.solution();
  double max_dist = 0.0;
  for (const auto& r : traj.records) max_dist = std::max(max_dist, std::sqrt(r.dist2));
  if (traj.final_z.dim_x() == zs.dim_x())
    max_dist = std::max(max_dist, std::sqrt(traj.final_z.squared_distance(zs)));
  return 2.0 * max_dist + zs.norm();
}

ContractionReport contraction_check(const Trajectory& traj,
                                    const SaddleProblem& problem,
                                    const OptimizerConfig& config) {
  if (config.method != Method::kExtragrad)
    throw PreconditionError("contraction check applies to extragrad runs");
  if (problem.sigma() != 0.0)
    throw PreconditionError("contraction check needs a deterministic oracle");
  if (config.scaling.update_prob != 1.0 || config.scaling.update_every_k > 1)
    throw PreconditionError("contraction check needs p = 1");
  if (!(problem.mu() > 0.0))
    throw PreconditionError("contraction check needs a strongly monotone problem");
  if (!problem.solution())
    throw PreconditionError("contraction check needs a known solution");

  ContractionReport report;
  const double gamma = resolved_gamma(config, problem);
  report.gamma_bound =
      gamma_bound(config.scaling.source, problem, traj.max_oracle_dist);
  if (traj.records.size() < 2) return report;

  const double r0 = traj.records.front().r2_weighted;
  const double base = 1.0 - gamma * problem.mu() / report.gamma_bound;
  ScalingState hyper = config.scaling;
  for (std::size_t i = 0; i + 1 < traj.records.size(); ++i) {
    // Record i carries D-hat after i + 1 updates; the next one applies
    // beta at counter i + 1.
    hyper.t = static_cast<std::int64_t>(i) + 1;
    const double factor = base + (growth_factor(hyper, report.gamma_bound) - 1.0);
    report.max_factor = std::max(report.max_factor, factor);
    const double lhs = traj.records[i + 1].r2_weighted;
    const double rhs = factor * traj.records[i].r2_weighted + 1e-10 * r0;
    ++report.steps_checked;
    if (!(lhs <= rhs) && !report.first_violation) {
      report.passed = false;
      report.first_violation = ContractionViolation{traj.records[i].t, lhs, rhs};
    }
  }
  return report;
}

FitResult fit_rate(std::span<const double> series, const FitOptions& options) {
  if (!options.abscissa.empty() && options.abscissa.size() != series.size())
    throw InvalidParameters("abscissa length must match the series");
  if (options.window == 1) throw InvalidParameters("window must be >= 2");
  if (!(options.burn_in_fraction >= 0.0 && options.burn_in_fraction < 1.0))
    throw InvalidParameters("burn-in fraction must lie in [0, 1)");

  const std::size_t n = series.size();
  std::size_t begin =
      static_cast<std::size_t>(std::floor(options.burn_in_fraction * n));
  if (options.window > 0 && n - begin > options.window) begin = n - options.window;
  if (n < begin + 2) throw InvalidParameters("fit needs at least two points");

  FitResult out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = begin; i < n; ++i) {
    double x = options.abscissa.empty()
                   ? static_cast<double>(options.mode == FitMode::kLogLog ? i + 1 : i)
                   : options.abscissa[i];
    if (options.mode == FitMode::kLogLog) {
      if (!(x > 0.0)) throw InvalidParameters("log-log fit needs positive x");
      x = std::log(x);
    }
    double v = series[i];
    if (!(v > 1e-300)) {
      v = 1e-300;
      out.floored = true;
    }
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(n - begin);
  const double denom = m * sxx - sx * sx;
  if (!(denom > 0.0)) throw InvalidParameters("fit abscissa is degenerate");
  out.slope = (m * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / m;
  out.points = n - begin;
  return out;
}

bool check_scalar_lemma(std::int64_t T) {
  if (T < 1) throw InvalidParameters("T must be >= 1");
  const double t = static_cast<double>(T);
  const double lhs = std::pow(1.0 - 1.0 / t, std::sqrt(t));
  const double rhs = 1.0 - 1.0 / (2.0 * std::sqrt(t));
  return lhs <= rhs + 1e-15;
}

double noise_floor(std::span<const double> series, double tail_fraction) {
  if (series.empty()) throw InvalidParameters("noise floor of an empty series");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw InvalidParameters("tail fraction must lie in (0, 1]");
  const std::size_t n = series.size();
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(tail_fraction * n)));
  std::vector<double> tail(series.end() - static_cast<std::ptrdiff_t>(k),
                           series.end());
  const std::size_t mid = tail.size() / 2;
  std::nth_element(tail.begin(), tail.begin() + mid, tail.end());
  if (tail.size() % 2) return tail[mid];
  const double upper = tail[mid];
  std::nth_element(tail.begin(), tail.begin() + mid - 1, tail.end());
  return 0.5 * (upper + tail[mid - 1]);
}

}  // namespace saddle
