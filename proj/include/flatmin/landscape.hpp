#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "flatmin/optim.hpp"
#include "flatmin/schedule.hpp"

namespace flatmin {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// One isotropic Gaussian well: contributes -depth * exp(-|x - center|^2 / (2 width^2)).
struct WellSpec {
  Vec2 center{0.0, 0.0};
  double depth = 1.0;
  double width = 1.0;
};

/// Two-parameter loss surface: base_level plus a sum of Gaussian wells.
struct LandscapeSpec {
  std::vector<WellSpec> wells;
  double base_level = 0.0;

  void validate() const;
};

struct LandscapeEval {
  double loss = 0.0;
  Vec2 grad{0.0, 0.0};
  Mat2 hessian{};
};

/// Loss with its exact gradient and Hessian.
LandscapeEval landscape_eval(const LandscapeSpec& spec, Vec2 theta);

/// Eigenvalues (ascending) of a symmetric 2x2 matrix in closed form.
std::array<double, 2> symmetric_eigenvalues(const Mat2& h);

/// Sum of absolute Hessian eigenvalues; the flatness proxy used throughout.
double flatness(const Mat2& h);

/// A final point counts as converged to a well when it lies within this many
/// widths of the well's center.
inline constexpr double kConvergenceRadiusWidths = 3.0;

/// Nearest well whose center lies within kConvergenceRadiusWidths * width.
std::optional<std::size_t> classify_well(const LandscapeSpec& spec, Vec2 theta);

struct TrajectoryStep {
  std::int64_t t = 0;
  Vec2 theta{0.0, 0.0};
  double loss = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectoryStep> steps;  // t = 1..total_steps, state after each update
  Vec2 final_theta{0.0, 0.0};
  std::optional<std::size_t> converged_well;
  double flatness = 0.0;
};

/// Runs `total_steps` updates with exact gradients. The schedule is sampled at
/// t - 1 for update t. With record_steps = false only the summary is kept.
TrajectoryRecord simulate_trajectory(const LandscapeSpec& spec, Vec2 start,
                                     const OptimizerConfig& optimizer, const LrSchedule& sched,
                                     std::int64_t total_steps, bool record_steps = true);

/// Axis-aligned start region: theta1 in [lower[0], upper[0]], theta2 in [lower[1], upper[1]].
struct GridRegion {
  Vec2 lower{-2.0, -2.0};
  Vec2 upper{3.0, 3.0};
};

/// Row-major start points (theta2 rows outer, theta1 columns inner). Each axis
/// is sampled at evenly spaced points including both ends; a single sample sits
/// at the midpoint.
std::vector<Vec2> grid_starts(const GridRegion& region, std::size_t cols, std::size_t rows);

/// Final flatness for every (optimizer, start) pair, indexed
/// [optimizer][row-major start]. Runs starts in parallel; result order is fixed.
std::vector<std::vector<double>> grid_flatness_study(const LandscapeSpec& spec,
                                                     const GridRegion& region, std::size_t cols,
                                                     std::size_t rows,
                                                     const std::vector<OptimizerConfig>& optimizers,
                                                     const LrSchedule& sched,
                                                     std::int64_t total_steps,
                                                     std::size_t threads = 0);

}  // namespace flatmin
