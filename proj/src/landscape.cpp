#include "flatmin/landscape.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "flatmin/errors.hpp"
#include "flatmin/parallel.hpp"

namespace flatmin {

void LandscapeSpec::validate() const {
  if (wells.empty()) throw ContractViolation("landscape needs at least one well");
  if (!std::isfinite(base_level)) throw ContractViolation("base_level must be finite");
  for (std::size_t i = 0; i < wells.size(); ++i) {
    const auto& w = wells[i];
    const std::string where = "well " + std::to_string(i);
    if (!(w.width > 0.0) || !std::isfinite(w.width)) throw ContractViolation(where + ": width must be > 0");
    if (!(w.depth > 0.0) || !std::isfinite(w.depth)) throw ContractViolation(where + ": depth must be > 0");
    if (!std::isfinite(w.center[0]) || !std::isfinite(w.center[1])) {
      throw ContractViolation(where + ": center must be finite");
    }
  }
}

LandscapeEval landscape_eval(const LandscapeSpec& spec, Vec2 theta) {
  LandscapeEval out;
  out.loss = spec.base_level;
  for (const auto& w : spec.wells) {
    const double dx = theta[0] - w.center[0];
    const double dy = theta[1] - w.center[1];
    const double inv_w2 = 1.0 / (w.width * w.width);
    const double e = w.depth * std::exp(-0.5 * (dx * dx + dy * dy) * inv_w2);
    out.loss -= e;
    // d/dx of -e is e * dx / w^2
    out.grad[0] += e * dx * inv_w2;
    out.grad[1] += e * dy * inv_w2;
    out.hessian[0][0] += e * inv_w2 * (1.0 - dx * dx * inv_w2);
    out.hessian[1][1] += e * inv_w2 * (1.0 - dy * dy * inv_w2);
    out.hessian[0][1] -= e * dx * dy * inv_w2 * inv_w2;
  }
  out.hessian[1][0] = out.hessian[0][1];
  return out;
}

std::array<double, 2> symmetric_eigenvalues(const Mat2& h) {
  const double mean = 0.5 * (h[0][0] + h[1][1]);
  const double half_diff = 0.5 * (h[0][0] - h[1][1]);
  const double radius = std::hypot(half_diff, h[0][1]);
  return {mean - radius, mean + radius};
}

double flatness(const Mat2& h) {
  const auto eig = symmetric_eigenvalues(h);
  return std::abs(eig[0]) + std::abs(eig[1]);
}

std::optional<std::size_t> classify_well(const LandscapeSpec& spec, Vec2 theta) {
  std::optional<std::size_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.wells.size(); ++i) {
    const auto& w = spec.wells[i];
    const double d = std::hypot(theta[0] - w.center[0], theta[1] - w.center[1]);
    if (d <= kConvergenceRadiusWidths * w.width && d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

TrajectoryRecord simulate_trajectory(const LandscapeSpec& spec, Vec2 start,
                                     const OptimizerConfig& optimizer, const LrSchedule& sched,
                                     std::int64_t total_steps, bool record_steps) {
  spec.validate();
  sched.validate();
  if (total_steps < 0) throw ContractViolation("total_steps must be >= 0");

  Optimizer opt(optimizer);
  TrajectoryRecord rec;
  if (record_steps) rec.steps.reserve(static_cast<std::size_t>(total_steps));
  std::array<double, 2> theta = start;
  for (std::int64_t t = 1; t <= total_steps; ++t) {
    const auto eval = landscape_eval(spec, theta);
    try {
      opt.step(theta, eval.grad, schedule_multiplier(sched, t - 1));
    } catch (const NonFiniteState&) {
      throw NonFiniteState("non-finite update on trajectory", t);
    }
    if (record_steps) {
      const double loss = landscape_eval(spec, theta).loss;
      if (!std::isfinite(loss)) throw NonFiniteState("non-finite loss on trajectory", t);
      rec.steps.push_back({t, theta, loss});
    }
  }
  rec.final_theta = theta;
  rec.converged_well = classify_well(spec, theta);
  rec.flatness = flatness(landscape_eval(spec, theta).hessian);
  return rec;
}

std::vector<Vec2> grid_starts(const GridRegion& region, std::size_t cols, std::size_t rows) {
  if (cols < 1 || rows < 1) throw ContractViolation("grid dimensions must be >= 1");
  auto axis = [](double lo, double hi, std::size_t n, std::size_t k) {
    if (n == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  };
  std::vector<Vec2> starts;
  starts.reserve(cols * rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      starts.push_back({axis(region.lower[0], region.upper[0], cols, c),
                        axis(region.lower[1], region.upper[1], rows, r)});
    }
  }
  return starts;
}

std::vector<std::vector<double>> grid_flatness_study(const LandscapeSpec& spec,
                                                     const GridRegion& region, std::size_t cols,
                                                     std::size_t rows,
                                                     const std::vector<OptimizerConfig>& optimizers,
                                                     const LrSchedule& sched,
                                                     std::int64_t total_steps,
                                                     std::size_t threads) {
  spec.validate();
  const auto starts = grid_starts(region, cols, rows);
  for (const auto& o : optimizers) o.validate();
  std::vector<std::vector<double>> out(optimizers.size(), std::vector<double>(starts.size()));
  const std::size_t jobs = optimizers.size() * starts.size();
  parallel_for(
      jobs,
      [&](std::size_t job) {
        const std::size_t o = job / starts.size();
        const std::size_t s = job % starts.size();
        out[o][s] =
            simulate_trajectory(spec, starts[s], optimizers[o], sched, total_steps, false).flatness;
      },
      threads == 0 ? configured_threads() : threads);
  return out;
}

}  // namespace flatmin
