#include "flatmin/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flatmin/errors.hpp"

namespace flatmin {

LrSchedule LrSchedule::constant() { return {}; }

LrSchedule LrSchedule::cosine(std::int64_t total_steps, double eta_min) {
  LrSchedule s;
  s.kind = ScheduleKind::cosine_annealing;
  s.total_steps = total_steps;
  s.eta_min = eta_min;
  return s;
}

LrSchedule LrSchedule::step_decay(std::vector<std::int64_t> milestones, double gamma) {
  LrSchedule s;
  s.kind = ScheduleKind::milestones;
  s.milestones = std::move(milestones);
  s.gamma = gamma;
  return s;
}

void LrSchedule::validate() const {
  switch (kind) {
    case ScheduleKind::constant:
      return;
    case ScheduleKind::cosine_annealing:
      if (total_steps < 1) throw ContractViolation("cosine schedule needs total_steps >= 1");
      if (!(eta_min >= 0.0 && eta_min < 1.0)) throw ContractViolation("eta_min must lie in [0, 1)");
      return;
    case ScheduleKind::milestones:
      if (!std::is_sorted(milestones.begin(), milestones.end())) {
        throw ContractViolation("milestones must be sorted");
      }
      if (!(gamma > 0.0 && gamma <= 1.0)) throw ContractViolation("gamma must lie in (0, 1]");
      return;
  }
}

double schedule_multiplier(const LrSchedule& sched, std::int64_t t) {
  switch (sched.kind) {
    case ScheduleKind::constant:
      return 1.0;
    case ScheduleKind::cosine_annealing: {
      if (t < 0 || t > sched.total_steps) {
        throw ContractViolation("cosine schedule index " + std::to_string(t) + " outside [0, " +
                                std::to_string(sched.total_steps) + "]");
      }
      const double phase = std::numbers::pi * static_cast<double>(t) /
                           static_cast<double>(sched.total_steps);
      return sched.eta_min + 0.5 * (1.0 - sched.eta_min) * (1.0 + std::cos(phase));
    }
    case ScheduleKind::milestones: {
      const auto passed = std::upper_bound(sched.milestones.begin(), sched.milestones.end(), t) -
                          sched.milestones.begin();
      return std::pow(sched.gamma, static_cast<double>(passed));
    }
  }
  return 1.0;
}

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::cosine_annealing: return "cosine_annealing";
    case ScheduleKind::milestones: return "milestones";
  }
  return "constant";
}

}  // namespace flatmin
