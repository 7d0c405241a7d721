#pragma once

#include "saddle/metrics.hpp"
#include "saddle/optim.hpp"
#include "saddle/precond.hpp"
#include "saddle/problems.hpp"
#include "saddle/types.hpp"

#include "json.hpp"

namespace saddle {

using Json = nlohmann::json;

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j);
/// {"rows": r, "cols": c, "data": [row-major entries]}
Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json to_json(const PointPair& z);
PointPair point_from_json(const Json& j);

/// Replayable problem document; see docs/formats.md.
Json to_json(const SaddleProblem& problem);
/// Rebuilds and re-certifies a problem. Throws InvalidParameters on
/// malformed or inconsistent documents.
SaddleProblem problem_from_json(const Json& j);

Json to_json(const ScalingState& state);
ScalingState scaling_from_json(const Json& j);

Json to_json(const RunRecord& record);
Json to_json(const ContractionReport& report);

}  // namespace saddle
