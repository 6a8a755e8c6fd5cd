#pragma once

#include "egat/autodiff.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace egat {

struct GradCheckOptions {
  double h = 1e-5;
  // Parameters with more entries than this are probed along random unit
  // directions instead of coordinate by coordinate.
  std::size_t max_coordinates = 1u << 20;
  std::size_t probes = 16;
  std::uint64_t seed = 1;
  // Relative error uses max(|analytic|, |numeric|, floor) as denominator, so
  // gradients below the floor are judged by absolute error.
  double floor = 1e-5;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t checks = 0;
  // Location of the largest relative error.
  std::size_t worst_parameter = 0;
  std::size_t worst_entry = 0;  // coordinate, or probe number for probed tensors
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares Tape::backward gradients of f against central differences. f must
// build its result from `params` and be deterministic.
GradCheckResult finite_diff_check(const std::function<Var()>& f, std::vector<Var> params,
                                  const GradCheckOptions& opts = {});

}  // namespace egat
