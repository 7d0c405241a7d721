#include "saddle/problems.hpp"

#include "saddle/errors.hpp"
#include "saddle/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <tuple>

namespace saddle {

namespace {

constexpr double kNoiseClip = 10.0;

Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(engine);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

Matrix jacobian(const QuadraticBlocks& b) {
  const Eigen::Index dx = b.A.rows();
  const Eigen::Index dy = b.C.rows();
  Matrix j(dx + dy, dx + dy);
  j.topLeftCorner(dx, dx) = b.A;
  j.topRightCorner(dx, dy) = b.B;
  j.bottomLeftCorner(dy, dx) = -b.B.transpose();
  j.bottomRightCorner(dy, dy) = b.C;
  return j;
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_symmetric(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

double minty_curvature(double kappa, double u) { return 1.0 + kappa * std::cos(u); }
double minty_slope(double kappa, double u) { return u + kappa * std::sin(u); }

// Largest ||[[p, b], [-b, q]]|| over p, q in [1 - kappa, 1 + kappa]. The norm
// is convex in (p, q), so the maximum sits at a corner.
double minty_smoothness(const MintyParams& m) {
  double best = 0.0;
  for (double p : {1.0 - m.kappa, 1.0 + m.kappa}) {
    for (double q : {1.0 - m.kappa, 1.0 + m.kappa}) {
      Eigen::Matrix2d j;
      j << p, m.coupling, -m.coupling, q;
      best = std::max(best, Eigen::JacobiSVD<Eigen::Matrix2d>(j)
                                .singularValues()(0));
    }
  }
  return best;
}

}  // namespace

struct ProblemFactory {
  static SaddleProblem from_blocks(ProblemKind kind, QuadraticBlocks blocks,
                                   double mu, double smoothness, double sigma,
                                   std::uint64_t seed) {
    SaddleProblem p;
    p.kind_ = kind;
    p.dim_x_ = blocks.A.rows();
    p.dim_y_ = blocks.C.rows();
    p.mu_ = mu;
    p.smoothness_ = smoothness;
    p.sigma_ = sigma;
    p.seed_ = seed;
    p.blocks_ = std::move(blocks);
    return p;
  }

  static SaddleProblem from_minty(MintyParams params, double sigma,
                                  std::uint64_t seed) {
    SaddleProblem p;
    p.kind_ = ProblemKind::kMinty;
    p.dim_x_ = 1;
    p.dim_y_ = 1;
    p.mu_ = 0.0;
    p.smoothness_ = minty_smoothness(params);
    p.sigma_ = sigma;
    p.seed_ = seed;
    p.minty_ = params;
    p.z_star_ = PointPair::zeros(1, 1);
    return p;
  }

  static void set_solution(SaddleProblem& p, PointPair z) {
    p.z_star_ = std::move(z);
  }
  static void set_seed(SaddleProblem& p, std::uint64_t seed) { p.seed_ = seed; }
  static void set_sigma(SaddleProblem& p, double sigma) { p.sigma_ = sigma; }
  static void set_work(SaddleProblem& p, int work) { p.oracle_work_ = work; }
};

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kQuadratic:
      return "quadratic";
    case ProblemKind::kBilinear:
      return "bilinear";
    case ProblemKind::kMinty:
      return "minty";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "quadratic") return ProblemKind::kQuadratic;
  if (name == "bilinear") return ProblemKind::kBilinear;
  if (name == "minty" || name == "minty-example") return ProblemKind::kMinty;
  throw InvalidParameters("unknown problem kind '" + std::string(name) + "'");
}

double SaddleProblem::noise_bound() const {
  return kNoiseClip * sigma_ * std::sqrt(static_cast<double>(dim()));
}

const QuadraticBlocks& SaddleProblem::blocks() const {
  if (!has_blocks())
    throw CapabilityError("minty problem has no quadratic blocks");
  return blocks_;
}

const MintyParams& SaddleProblem::minty() const {
  if (kind_ != ProblemKind::kMinty)
    throw CapabilityError("not a minty problem");
  return minty_;
}

SaddleProblem SaddleProblem::with_noise(double sigma) const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidParameters("sigma must be finite and >= 0");
  SaddleProblem p = *this;
  ProblemFactory::set_sigma(p, sigma);
  return p;
}

SaddleProblem SaddleProblem::with_oracle_work(int extra_evaluations) const {
  if (extra_evaluations < 0)
    throw InvalidParameters("oracle work must be >= 0");
  SaddleProblem p = *this;
  ProblemFactory::set_work(p, extra_evaluations);
  return p;
}

SaddleProblem SaddleProblem::with_seed(std::uint64_t seed) const {
  SaddleProblem p = *this;
  ProblemFactory::set_seed(p, seed);
  return p;
}

SaddleProblem SaddleProblem::with_constants(double mu, double smoothness) const {
  double mu_hat = 0.0, l_hat = 0.0;
  if (has_blocks()) {
    std::tie(mu_hat, l_hat) = certified_constants();
  } else {
    mu_hat = 0.0;
    l_hat = minty_smoothness(minty_);
  }
  if (!(mu >= 0.0) || mu > std::max(mu_hat, 0.0) * (1.0 + 1e-9) + 1e-12)
    throw InvalidParameters("mu exceeds the certified strong-monotonicity modulus");
  if (!(smoothness >= l_hat * (1.0 - 1e-9)) || !std::isfinite(smoothness))
    throw InvalidParameters("L is below the certified Lipschitz constant");
  SaddleProblem p = *this;
  p.mu_ = mu;
  p.smoothness_ = smoothness;
  return p;
}

void SaddleProblem::check_point(const PointPair& z) const {
  if (z.dim_x() != dim_x_ || z.dim_y() != dim_y_)
    throw DimensionMismatch("point has dims (" + std::to_string(z.dim_x()) +
                            ", " + std::to_string(z.dim_y()) +
                            "), problem expects (" + std::to_string(dim_x_) +
                            ", " + std::to_string(dim_y_) + ")");
  if (!z.all_finite()) throw InvalidParameters("point has non-finite entries");
}

double SaddleProblem::value(const PointPair& z) const {
  check_point(z);
  if (kind_ == ProblemKind::kMinty) {
    const double x = z.x(0), y = z.y(0);
    auto g = [&](double u) { return 0.5 * u * u - minty_.kappa * std::cos(u); };
    return minty_.coupling * x * y + g(x) - g(y);
  }
  const auto& b = blocks_;
  return 0.5 * z.x.dot(b.A * z.x) + z.x.dot(b.B * z.y) -
         0.5 * z.y.dot(b.C * z.y) + b.a.dot(z.x) - b.c.dot(z.y);
}

FieldValue SaddleProblem::field(const PointPair& z) const {
  check_point(z);
  FieldValue out;
  if (kind_ == ProblemKind::kMinty) {
    const double x = z.x(0), y = z.y(0);
    out.gx = Vector::Constant(1, minty_.coupling * y + minty_slope(minty_.kappa, x));
    out.gy_neg =
        Vector::Constant(1, -minty_.coupling * x + minty_slope(minty_.kappa, y));
    return out;
  }
  const auto& b = blocks_;
  out.gx = b.A * z.x + b.B * z.y + b.a;
  out.gy_neg = b.C * z.y - b.B.transpose() * z.x + b.c;
  return out;
}

FieldValue SaddleProblem::gradient(const PointPair& z,
                                   const OracleSample& sample) const {
  if (sample.batch < 1) throw InvalidParameters("batch must be >= 1");
  FieldValue out = field(z);
  // (v + v) / 2 == v exactly, so the repeats only cost time.
  for (int i = 0; i < oracle_work_; ++i) {
    FieldValue again = field(z);
    out.gx = 0.5 * (out.gx + again.gx);
    out.gy_neg = 0.5 * (out.gy_neg + again.gy_neg);
  }
  out.calls = 1;
  if (sigma_ > 0.0) {
    std::mt19937_64 engine(mix64(sample.seed));
    std::normal_distribution<double> normal(0.0, sigma_);
    const double clip = kNoiseClip * sigma_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(sample.batch));
    auto draw = [&] { return scale * std::clamp(normal(engine), -clip, clip); };
    for (Eigen::Index i = 0; i < out.gx.size(); ++i) out.gx(i) += draw();
    for (Eigen::Index i = 0; i < out.gy_neg.size(); ++i) out.gy_neg(i) += draw();
  }
  return out;
}

std::pair<Vector, Vector> SaddleProblem::hvp(const PointPair& z,
                                             const Vector& vx, const Vector& vy,
                                             const OracleSample&) const {
  check_point(z);
  if (vx.size() != dim_x_ || vy.size() != dim_y_)
    throw DimensionMismatch("hvp direction has wrong dimensions");
  if (kind_ == ProblemKind::kMinty) {
    return {Vector::Constant(1, minty_curvature(minty_.kappa, z.x(0)) * vx(0)),
            Vector::Constant(1, minty_curvature(minty_.kappa, z.y(0)) * vy(0))};
  }
  // grad_yy f = -C. The sign is irrelevant to the curvature estimators, which
  // use the Hessian of each player's own objective: C for the max player.
  return {blocks_.A * vx, blocks_.C * vy};
}

std::pair<Vector, Vector> SaddleProblem::hessian_diagonal(
    const PointPair& z) const {
  check_point(z);
  if (kind_ == ProblemKind::kMinty) {
    return {Vector::Constant(1, minty_curvature(minty_.kappa, z.x(0))),
            Vector::Constant(1, minty_curvature(minty_.kappa, z.y(0)))};
  }
  return {blocks_.A.diagonal(), blocks_.C.diagonal()};
}

std::pair<double, double> SaddleProblem::certified_constants() const {
  const auto& b = blocks();
  return {std::min(min_eigenvalue(b.A), min_eigenvalue(b.C)),
          operator_norm(jacobian(b))};
}

SaddleProblem make_custom_quadratic(QuadraticBlocks blocks, double sigma,
                                    bool require_monotone) {
  const Eigen::Index dx = blocks.A.rows();
  const Eigen::Index dy = blocks.C.rows();
  if (dx < 1 || dy < 1) throw InvalidParameters("dimensions must be >= 1");
  if (blocks.A.cols() != dx || blocks.C.cols() != dy ||
      blocks.B.rows() != dx || blocks.B.cols() != dy || blocks.a.size() != dx ||
      blocks.c.size() != dy)
    throw DimensionMismatch("quadratic blocks have inconsistent shapes");
  if (!is_symmetric(blocks.A) || !is_symmetric(blocks.C))
    throw InvalidParameters("A and C must be symmetric");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidParameters("sigma must be finite and >= 0");
  const double mu = std::min(min_eigenvalue(blocks.A), min_eigenvalue(blocks.C));
  if (require_monotone && mu < -1e-12)
    throw InvalidParameters("A and C must be positive semidefinite");
  const double smoothness = operator_norm(jacobian(blocks));
  if (!(smoothness > 0.0)) throw InvalidParameters("operator is identically zero");
  const bool bilinear = blocks.A.isZero(0.0) && blocks.C.isZero(0.0) &&
                        blocks.a.isZero(0.0) && blocks.c.isZero(0.0);
  SaddleProblem p = ProblemFactory::from_blocks(
      bilinear ? ProblemKind::kBilinear : ProblemKind::kQuadratic,
      std::move(blocks), std::max(mu, 0.0), smoothness, sigma, 0);
  try {
    ProblemFactory::set_solution(p, solve_exact(p));
  } catch (const NoUniqueSolution&) {
    // Singular systems are allowed; the problem simply has no z*.
  }
  return p;
}

SaddleProblem make_quadratic(Eigen::Index dim_x, Eigen::Index dim_y, double mu,
                             double smoothness, std::uint64_t seed,
                             double sigma) {
  if (dim_x < 1 || dim_y < 1) throw InvalidParameters("dimensions must be >= 1");
  if (!(mu > 0.0) || !(smoothness > 0.0) || !std::isfinite(smoothness))
    throw InvalidParameters("need 0 < mu <= L");
  if (mu > smoothness)
    throw InvalidParameters("mu must not exceed L");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidParameters("sigma must be finite and >= 0");

  std::mt19937_64 engine(derive_seed(seed, hash_name("quadratic")));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Eigen::Index n = dim_x + dim_y;
  Vector u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = unit(engine);
  Eigen::Index imin = 0, imax = 0;
  u.minCoeff(&imin);
  u.maxCoeff(&imax);
  u(imin) = 0.0;
  u(imax) = 1.0;

  const Matrix qa = random_orthogonal(dim_x, engine);
  const Matrix qc = random_orthogonal(dim_y, engine);
  const Matrix ub = random_orthogonal(dim_x, engine);
  const Matrix vb = random_orthogonal(dim_y, engine);

  const Eigen::Index rank = std::min(dim_x, dim_y);
  const double s_max = std::min(0.5 * smoothness, smoothness - mu);
  Vector singular(rank);
  for (Eigen::Index i = 0; i < rank; ++i) singular(i) = s_max * unit(engine);

  QuadraticBlocks blocks;
  blocks.B = ub.leftCols(rank) * singular.asDiagonal() *
             vb.leftCols(rank).transpose();
  blocks.a = Vector(dim_x);
  blocks.c = Vector(dim_y);
  for (Eigen::Index i = 0; i < dim_x; ++i) blocks.a(i) = normal(engine);
  for (Eigen::Index i = 0; i < dim_y; ++i) blocks.c(i) = normal(engine);

  auto assemble = [&](double top) {
    const double ratio = top / mu;
    Vector lam(n);
    for (Eigen::Index i = 0; i < n; ++i) lam(i) = mu * std::pow(ratio, u(i));
    lam(imin) = mu;
    lam(imax) = top;
    blocks.A = qa * lam.head(dim_x).asDiagonal() * qa.transpose();
    blocks.C = qc * lam.tail(dim_y).asDiagonal() * qc.transpose();
    blocks.A = 0.5 * (blocks.A + blocks.A.transpose()).eval();
    blocks.C = 0.5 * (blocks.C + blocks.C.transpose()).eval();
  };

  // ||J|| is continuous in the top eigenvalue, <= L at mu (||S|| + ||B||) and
  // >= L at L (||J|| >= max z'Jz = ||S||). Keep the side with ||J|| <= L.
  double lo = mu, hi = smoothness;
  if (s_max > 0.0) {
    for (int it = 0; it < 80 && hi - lo > 1e-15 * smoothness; ++it) {
      const double mid = 0.5 * (lo + hi);
      assemble(mid);
      if (operator_norm(jacobian(blocks)) <= smoothness)
        lo = mid;
      else
        hi = mid;
    }
  } else {
    lo = smoothness;
  }
  assemble(lo);

  SaddleProblem p = ProblemFactory::from_blocks(
      ProblemKind::kQuadratic, std::move(blocks), mu, smoothness, sigma, seed);
  ProblemFactory::set_solution(p, solve_exact(p));
  return p;
}

SaddleProblem make_bilinear_from(Matrix B, double sigma) {
  const Eigen::Index d = B.rows();
  if (d < 1 || B.cols() < 1) throw InvalidParameters("dimensions must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidParameters("sigma must be finite and >= 0");
  QuadraticBlocks blocks;
  blocks.A = Matrix::Zero(B.rows(), B.rows());
  blocks.C = Matrix::Zero(B.cols(), B.cols());
  blocks.a = Vector::Zero(B.rows());
  blocks.c = Vector::Zero(B.cols());
  blocks.B = std::move(B);
  const double smoothness = operator_norm(blocks.B);
  if (!(smoothness > 0.0)) throw InvalidParameters("B must be nonzero");
  SaddleProblem p = ProblemFactory::from_blocks(
      ProblemKind::kBilinear, std::move(blocks), 0.0, smoothness, sigma, 0);
  try {
    ProblemFactory::set_solution(p, solve_exact(p));
  } catch (const NoUniqueSolution&) {
  }
  return p;
}

SaddleProblem make_bilinear(Eigen::Index dim, double smoothness,
                            std::uint64_t seed, double sigma) {
  if (dim < 1) throw InvalidParameters("dimension must be >= 1");
  if (!(smoothness > 0.0) || !std::isfinite(smoothness))
    throw InvalidParameters("L must be > 0");
  Matrix B;
  if (dim == 1) {
    B = Matrix::Constant(1, 1, smoothness);
  } else {
    std::mt19937_64 engine(derive_seed(seed, hash_name("bilinear")));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Matrix u = random_orthogonal(dim, engine);
    const Matrix v = random_orthogonal(dim, engine);
    Vector s(dim);
    s(0) = smoothness;
    // Bounded away from zero so the extragradient iteration contracts at a
    // rate independent of the draw.
    for (Eigen::Index i = 1; i < dim; ++i)
      s(i) = smoothness * (0.25 + 0.75 * unit(engine));
    B = u * s.asDiagonal() * v.transpose();
  }
  SaddleProblem p = make_bilinear_from(std::move(B), sigma);
  ProblemFactory::set_seed(p, seed);
  return p;
}

SaddleProblem make_minty_from(MintyParams params, double sigma) {
  if (!(params.kappa > 1.0) || !(params.kappa < 4.5))
    throw InvalidParameters("kappa must lie in (1, 4.5)");
  if (!(params.coupling >= 0.0) || !std::isfinite(params.coupling))
    throw InvalidParameters("coupling must be finite and >= 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidParameters("sigma must be finite and >= 0");
  SaddleProblem p = ProblemFactory::from_minty(params, sigma, 0);
  if (!verify_minty(p, 10.0, 1000))
    throw InternalError("minty construction failed grid certification");
  return p;
}

SaddleProblem make_minty(std::uint64_t seed, double sigma) {
  std::mt19937_64 engine(derive_seed(seed, hash_name("minty")));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MintyParams params;
  params.kappa = 1.5 + 1.5 * unit(engine);
  params.coupling = 0.5 + unit(engine);
  SaddleProblem p = make_minty_from(params, sigma);
  ProblemFactory::set_seed(p, seed);
  return p;
}

bool verify_minty(const SaddleProblem& problem, double radius, int grid_n) {
  if (!problem.solution())
    throw PreconditionError("verify_minty needs a known solution");
  if (grid_n < 2) throw PreconditionError("grid_n must be >= 2");
  if (problem.dim_x() != 1 || problem.dim_y() != 1)
    throw PreconditionError("verify_minty grids only 1+1 problems");
  if (!(radius > 0.0)) throw PreconditionError("radius must be > 0");
  const PointPair& zs = *problem.solution();
  PointPair z = zs;
  for (int i = 0; i < grid_n; ++i) {
    const double dx = -radius + 2.0 * radius * i / (grid_n - 1);
    z.x(0) = zs.x(0) + dx;
    for (int j = 0; j < grid_n; ++j) {
      const double dy = -radius + 2.0 * radius * j / (grid_n - 1);
      z.y(0) = zs.y(0) + dy;
      const FieldValue f = problem.field(z);
      if (f.gx(0) * dx + f.gy_neg(0) * dy < -1e-12) return false;
    }
  }
  return true;
}

PointPair solve_exact(const SaddleProblem& problem) {
  if (!problem.has_blocks())
    throw PreconditionError("solve_exact needs a quadratic or bilinear problem");
  const auto& b = problem.blocks();
  const Eigen::Index dx = problem.dim_x(), dy = problem.dim_y();
  const Matrix j = jacobian(b);
  Vector rhs(dx + dy);
  rhs << -b.a, -b.c;
  Eigen::FullPivLU<Matrix> lu(j);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible())
    throw NoUniqueSolution("stationarity system is singular");
  Vector z = lu.solve(rhs);
  // One refinement pass pulls the residual down to the rounding floor.
  z += lu.solve(rhs - j * z);
  return {z.head(dx), z.tail(dy)};
}

}  // namespace saddle
