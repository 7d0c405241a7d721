#include "saddle/serialize.hpp"

#include "saddle/errors.hpp"

#include <string>

namespace saddle {

namespace {

template <typename T>
T require(const Json& j, const char* key) {
  if (!j.contains(key))
    throw InvalidParameters(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameters(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const Vector& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidParameters("expected an array of numbers");
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
}

Json to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = require<Eigen::Index>(j, "rows");
  const auto cols = require<Eigen::Index>(j, "cols");
  const auto data = require<std::vector<double>>(j, "data");
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
    throw InvalidParameters("matrix data length does not match rows * cols");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = data[static_cast<std::size_t>(i * cols + k)];
  return m;
}

Json to_json(const PointPair& z) {
  return {{"x", to_json(z.x)}, {"y", to_json(z.y)}};
}

PointPair point_from_json(const Json& j) {
  if (!j.contains("x") || !j.contains("y"))
    throw InvalidParameters("point needs 'x' and 'y'");
  return {vector_from_json(j.at("x")), vector_from_json(j.at("y"))};
}

Json to_json(const SaddleProblem& problem) {
  Json j;
  j["kind"] = std::string(to_string(problem.kind()));
  j["d_x"] = problem.dim_x();
  j["d_y"] = problem.dim_y();
  j["seed"] = problem.seed();
  j["mu"] = problem.mu();
  j["L"] = problem.smoothness();
  j["sigma"] = problem.sigma();
  j["noise_bound"] = problem.noise_bound();
  j["oracle_work"] = problem.oracle_work();
  if (problem.has_blocks()) {
    const auto& b = problem.blocks();
    j["A"] = to_json(b.A);
    j["B"] = to_json(b.B);
    j["C"] = to_json(b.C);
    j["a"] = to_json(b.a);
    j["c"] = to_json(b.c);
  } else {
    j["minty"] = {{"coupling", problem.minty().coupling},
                  {"kappa", problem.minty().kappa}};
  }
  j["z_star"] = problem.solution() ? to_json(*problem.solution()) : Json();
  return j;
}

SaddleProblem problem_from_json(const Json& j) {
  const ProblemKind kind = parse_problem_kind(require<std::string>(j, "kind"));
  const double sigma = j.value("sigma", 0.0);
  SaddleProblem p = [&] {
    switch (kind) {
      case ProblemKind::kMinty: {
        const Json& m = j.at("minty");
        return make_minty_from(
            MintyParams{require<double>(m, "coupling"), require<double>(m, "kappa")},
            sigma);
      }
      case ProblemKind::kBilinear:
        return make_bilinear_from(matrix_from_json(j.at("B")), sigma);
      case ProblemKind::kQuadratic:
      default: {
        QuadraticBlocks blocks{matrix_from_json(j.at("A")),
                               matrix_from_json(j.at("B")),
                               matrix_from_json(j.at("C")),
                               vector_from_json(j.at("a")),
                               vector_from_json(j.at("c"))};
        return make_custom_quadratic(std::move(blocks), sigma);
      }
    }
  }();
  if (j.contains("d_x") && require<Eigen::Index>(j, "d_x") != p.dim_x())
    throw InvalidParameters("d_x does not match the matrices");
  if (j.contains("d_y") && require<Eigen::Index>(j, "d_y") != p.dim_y())
    throw InvalidParameters("d_y does not match the matrices");
  if (j.contains("mu") && j.contains("L"))
    p = p.with_constants(require<double>(j, "mu"), require<double>(j, "L"));
  if (j.contains("seed")) p = p.with_seed(require<std::uint64_t>(j, "seed"));
  if (j.contains("oracle_work"))
    p = p.with_oracle_work(require<int>(j, "oracle_work"));
  return p;
}

Json to_json(const ScalingState& s) {
  return {{"rule", std::string(to_string(s.rule))},
          {"source", std::string(to_string(s.source))},
          {"schedule", std::string(to_string(s.schedule))},
          {"clip", std::string(to_string(s.clip))},
          {"beta", s.beta},
          {"e", s.floor_e},
          {"p", s.update_prob},
          {"update_every_k", s.update_every_k},
          {"t", s.t},
          {"last_fired", s.last_fired},
          {"raw_x", to_json(s.raw_x)},
          {"raw_y", to_json(s.raw_y)},
          {"clipped_x", to_json(s.clipped_x)},
          {"clipped_y", to_json(s.clipped_y)}};
}

ScalingState scaling_from_json(const Json& j) {
  ScalingState s;
  s.rule = parse_ema_rule(require<std::string>(j, "rule"));
  s.source = parse_curvature_source(require<std::string>(j, "source"));
  s.schedule = parse_beta_schedule(require<std::string>(j, "schedule"));
  s.clip = parse_clip_mode(j.value("clip", std::string("max")));
  s.beta = require<double>(j, "beta");
  s.floor_e = require<double>(j, "e");
  s.update_prob = require<double>(j, "p");
  s.update_every_k = j.value("update_every_k", 0);
  s.t = j.value("t", std::int64_t{0});
  s.last_fired = j.value("last_fired", false);
  if (j.contains("raw_x")) {
    s.raw_x = vector_from_json(j.at("raw_x"));
    s.raw_y = vector_from_json(j.at("raw_y"));
    s.clipped_x = clip_diagonal(s.raw_x, s);
    s.clipped_y = clip_diagonal(s.raw_y, s);
  }
  s.validate();
  return s;
}

Json to_json(const RunRecord& r) {
  return {{"t", r.t},
          {"r2_weighted", r.r2_weighted},
          {"dist2", r.dist2},
          {"grad_norm2", r.grad_norm2},
          {"gap", r.gap ? Json(*r.gap) : Json()},
          {"dhat_min", r.dhat_min},
          {"dhat_max", r.dhat_max},
          {"grad_calls", r.grad_calls}};
}

Json to_json(const ContractionReport& r) {
  Json j = {{"passed", r.passed},
            {"steps_checked", r.steps_checked},
            {"gamma_bound", r.gamma_bound},
            {"max_factor", r.max_factor}};
  if (r.first_violation)
    j["first_violation"] = {{"t", r.first_violation->t},
                            {"lhs", r.first_violation->lhs},
                            {"rhs", r.first_violation->rhs}};
  return j;
}

}  // namespace saddle
