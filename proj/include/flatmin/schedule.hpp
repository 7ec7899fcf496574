#pragma once

#include <cstdint>
#include <vector>

namespace flatmin {

enum class ScheduleKind { constant, cosine_annealing, milestones };

/// Learning-rate multiplier schedule applied on top of an optimizer's alpha.
struct LrSchedule {
  ScheduleKind kind = ScheduleKind::constant;
  std::int64_t total_steps = 0;  // cosine horizon T
  double eta_min = 0.0;          // cosine floor, relative to 1
  std::vector<std::int64_t> milestones;
  double gamma = 0.1;

  static LrSchedule constant();
  static LrSchedule cosine(std::int64_t total_steps, double eta_min = 0.0);
  static LrSchedule step_decay(std::vector<std::int64_t> milestones, double gamma);

  void validate() const;
};

/// Multiplier at schedule index t (0-based, PyTorch scheduler convention:
/// the first update uses t = 0). Cosine accepts 0 <= t <= total_steps.
double schedule_multiplier(const LrSchedule& sched, std::int64_t t);

const char* to_string(ScheduleKind kind);

}  // namespace flatmin
