#pragma once

#include <cstdint>
#include <optional>

namespace saddle {

/// Metrics for one iteration, taken at z_t with the scaling used by step t.
struct RunRecord {
  std::int64_t t = 0;
  /// ||x_t - x*||^2_{D-hat^x} + ||y_t - y*||^2_{D-hat^y}
  double r2_weighted = 0.0;
  double dist2 = 0.0;
  /// ||F(z_t)||^2 of the exact operator.
  double grad_norm2 = 0.0;
  /// Restricted gap of the running average; absent when not requested or
  /// when the problem kind has no certified inner solver.
  std::optional<double> gap;
  double dhat_min = 0.0;
  double dhat_max = 0.0;
  std::int64_t grad_calls = 0;
};

}  // namespace saddle
