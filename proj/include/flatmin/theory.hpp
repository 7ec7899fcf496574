#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flatmin/optim.hpp"

namespace flatmin {

/// Inputs to the closed-form mean escape times from a sharp minimum `a`
/// through a saddle `u`.
struct EscapeScenario {
  double alpha = 1e-3;
  double beta1 = 0.9;
  std::int64_t batch_size = 128;
  double delta_L = 0.1;               // L(u) - L(a)
  std::vector<double> h_a_eigs;       // Hessian spectrum at the minimum, all > 0
  std::vector<double> h_u_eigs;       // Hessian spectrum at the saddle, one entry < 0
  std::size_t escape_index = 0;       // position of the negative saddle eigenvalue
  double rho = 0.5;                   // path-dependent weight in [0, 1]
  double t_tilde = 1.0;               // continuous time, > 0

  void validate() const;
  double h_ae() const { return h_a_eigs.at(escape_index); }
  double h_ue() const { return h_u_eigs.at(escape_index); }
  /// |det(H_a^-1 H_u)| = prod |h_u[i]| / h_a[i]
  double det_ratio() const;
};

struct EscapeTime {
  double value = 0.0;       // +inf when the exponential overflows
  double log_value = 0.0;   // natural log, always finite
  bool overflowed = false;
};

/// Mean escape time of MIAdam1 before the switch.
EscapeTime escape_time_miadam1(const EscapeScenario& s);

/// Mean escape time of Adam (no t_tilde dependence).
EscapeTime escape_time_adam(const EscapeScenario& s);

/// Online problem f_t(theta) = 0.5 |theta - c_t|^2 with bounded drifting
/// targets c_{t,i} = center_i + amplitude * sin(2 pi t / period_i + phase_i).
/// The offline minimizer over a horizon is the mean target.
struct DriftingQuadratic {
  std::vector<double> center;
  std::vector<double> period;
  std::vector<double> phase;
  double amplitude = 0.2;

  /// Seeded instance: center_i ~ U[0, 2], period_i ~ U[50, 500], phase_i ~ U[0, 2 pi).
  static DriftingQuadratic generate(std::size_t dim, double amplitude, std::uint64_t seed);
  /// Target identical at every round.
  static DriftingQuadratic stationary(std::vector<double> target);

  std::size_t dim() const { return center.size(); }
  void target(std::int64_t t, std::span<double> out) const;
  std::vector<double> offline_minimizer(std::int64_t horizon) const;
};

struct RegretOptions {
  std::int64_t horizon = 100000;
  /// alpha_t = alpha / t^h
  double lr_decay_power = 0.5;
  /// beta1_t = beta1 * lambda^(t-1); 1.0 disables the decay
  double beta1_decay = 1.0;
  std::vector<double> theta0;  // empty: zeros
};

struct RegretSeries {
  std::string optimizer_label;
  std::int64_t horizon = 0;
  std::vector<double> cumulative_regret;  // R(1)..R(horizon)
  std::vector<double> average_regret;     // R(t) / t
};

/// Runs the optimizer online against the offline minimizer over the full
/// horizon. MIAdam configs run with the switch disabled.
RegretSeries run_regret_experiment(const DriftingQuadratic& problem, const OptimizerConfig& optimizer,
                                   const RegretOptions& options);

}  // namespace flatmin
