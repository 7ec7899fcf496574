#include "flatmin/theory.hpp"

#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "flatmin/errors.hpp"

namespace flatmin {

namespace {

// Finishes an escape time from its pre-exponential factor and exponent.
EscapeTime assemble(double prefactor, double exponent) {
  EscapeTime out;
  out.log_value = std::log(prefactor) + exponent;
  const double e = std::exp(exponent);
  out.value = prefactor * e;
  if (!std::isfinite(out.value)) {
    out.value = std::numeric_limits<double>::infinity();
    out.overflowed = true;
  }
  return out;
}

}  // namespace

void EscapeScenario::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ContractViolation("alpha must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ContractViolation("beta1 must lie in [0, 1)");
  if (batch_size < 1) throw ContractViolation("batch size must be >= 1");
  if (!(delta_L > 0.0) || !std::isfinite(delta_L)) throw ContractViolation("delta_L must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ContractViolation("rho must lie in [0, 1]");
  if (!(t_tilde > 0.0) || !std::isfinite(t_tilde)) throw ContractViolation("t_tilde must be > 0");
  if (h_a_eigs.empty()) throw ContractViolation("h_a_eigs must be non-empty");
  if (h_a_eigs.size() != h_u_eigs.size()) {
    throw ContractViolation("h_a_eigs and h_u_eigs must have the same length");
  }
  if (escape_index >= h_u_eigs.size()) throw ContractViolation("escape_index out of range");
  for (double x : h_a_eigs) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ContractViolation("h_a_eigs must all be > 0");
  }
  for (std::size_t i = 0; i < h_u_eigs.size(); ++i) {
    const double x = h_u_eigs[i];
    if (!std::isfinite(x) || x == 0.0) throw ContractViolation("h_u_eigs must be finite and non-zero");
    if ((x < 0.0) != (i == escape_index)) {
      throw ContractViolation("h_u_eigs must have exactly one negative entry, at escape_index");
    }
  }
}

double EscapeScenario::det_ratio() const {
  double r = 1.0;
  for (std::size_t i = 0; i < h_a_eigs.size(); ++i) r *= std::abs(h_u_eigs[i]) / h_a_eigs[i];
  return r;
}

EscapeTime escape_time_miadam1(const EscapeScenario& s) {
  s.validate();
  const double b = static_cast<double>(s.batch_size);
  const double hue = std::abs(s.h_ue());
  const double root = std::sqrt(1.0 + 4.0 * s.alpha * std::sqrt(b * hue) / (s.t_tilde * (1.0 - s.beta1)));
  const double prefactor = std::numbers::pi * (root + 1.0) * std::pow(s.det_ratio(), 0.25) / hue;
  const double exponent = 2.0 * std::sqrt(b) * s.delta_L / (s.t_tilde * s.alpha) *
                          (s.rho / std::sqrt(s.h_ae()) + (1.0 - s.rho) / std::sqrt(hue));
  return assemble(prefactor, exponent);
}

EscapeTime escape_time_adam(const EscapeScenario& s) {
  s.validate();
  const double b = static_cast<double>(s.batch_size);
  const double hue = std::abs(s.h_ue());
  const double root = std::sqrt(1.0 + 4.0 * s.alpha * std::sqrt(b * hue) / (1.0 - s.beta1));
  const double prefactor = std::numbers::pi * (root + 1.0) * std::pow(s.det_ratio(), 0.25) / hue;
  const double exponent = 2.0 * std::sqrt(b) * s.delta_L / s.alpha *
                          (s.rho / std::sqrt(s.h_ae()) + (1.0 - s.rho) / std::sqrt(hue));
  return assemble(prefactor, exponent);
}

DriftingQuadratic DriftingQuadratic::generate(std::size_t dim, double amplitude, std::uint64_t seed) {
  if (dim < 1) throw ContractViolation("problem dimension must be >= 1");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ContractViolation("amplitude must be >= 0");
  DriftingQuadratic p;
  p.amplitude = amplitude;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < dim; ++i) {
    p.center.push_back(2.0 * unit(rng));
    p.period.push_back(50.0 + 450.0 * unit(rng));
    p.phase.push_back(2.0 * std::numbers::pi * unit(rng));
  }
  return p;
}

DriftingQuadratic DriftingQuadratic::stationary(std::vector<double> target) {
  DriftingQuadratic p;
  p.amplitude = 0.0;
  p.period.assign(target.size(), 1.0);
  p.phase.assign(target.size(), 0.0);
  p.center = std::move(target);
  return p;
}

void DriftingQuadratic::target(std::int64_t t, std::span<double> out) const {
  for (std::size_t i = 0; i < center.size(); ++i) {
    out[i] = amplitude == 0.0
                 ? center[i]
                 : center[i] + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period[i] +
                                                    phase[i]);
  }
}

std::vector<double> DriftingQuadratic::offline_minimizer(std::int64_t horizon) const {
  std::vector<double> sum(dim(), 0.0), c(dim());
  for (std::int64_t t = 1; t <= horizon; ++t) {
    target(t, c);
    for (std::size_t i = 0; i < dim(); ++i) sum[i] += c[i];
  }
  for (auto& x : sum) x /= static_cast<double>(horizon);
  return sum;
}

RegretSeries run_regret_experiment(const DriftingQuadratic& problem, const OptimizerConfig& optimizer,
                                   const RegretOptions& options) {
  if (options.horizon < 1) throw ContractViolation("horizon must be >= 1");
  if (!(options.lr_decay_power >= 0.0)) throw ContractViolation("lr_decay_power must be >= 0");
  if (!(options.beta1_decay > 0.0 && options.beta1_decay <= 1.0)) {
    throw ContractViolation("beta1_decay must lie in (0, 1]");
  }
  const std::size_t d = problem.dim();
  if (!options.theta0.empty() && options.theta0.size() != d) {
    throw ContractViolation("theta0 dimension does not match the problem");
  }

  OptimizerConfig cfg = optimizer;
  if (auto* mi = std::get_if<MIAdamHyperParams>(&cfg.params)) mi->switch_step = kNeverSwitch;
  cfg.validate();
  const double base_beta1 = [&] {
    if (auto* a = std::get_if<AdamHyperParams>(&cfg.params)) return a->beta1;
    if (auto* mi = std::get_if<MIAdamHyperParams>(&cfg.params)) return mi->adam.beta1;
    return 0.0;
  }();

  const auto theta_star = problem.offline_minimizer(options.horizon);
  ParamVector theta = options.theta0.empty() ? ParamVector(d, 0.0) : options.theta0;
  ParamVector grad(d), c(d);
  OptimizerState state;

  RegretSeries series;
  series.optimizer_label = cfg.label;
  series.horizon = options.horizon;
  series.cumulative_regret.reserve(static_cast<std::size_t>(options.horizon));
  series.average_regret.reserve(static_cast<std::size_t>(options.horizon));

  double regret = 0.0;
  for (std::int64_t t = 1; t <= options.horizon; ++t) {
    problem.target(t, c);
    double f = 0.0, f_star = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      f += 0.5 * (theta[i] - c[i]) * (theta[i] - c[i]);
      f_star += 0.5 * (theta_star[i] - c[i]) * (theta_star[i] - c[i]);
      grad[i] = theta[i] - c[i];
    }
    regret += f - f_star;
    series.cumulative_regret.push_back(regret);
    series.average_regret.push_back(regret / static_cast<double>(t));

    const double lr_mult = std::pow(static_cast<double>(t), -options.lr_decay_power);
    const double beta1_t = base_beta1 * std::pow(options.beta1_decay, static_cast<double>(t - 1));
    try {
      std::visit(
          [&](auto p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SgdParams>) {
              sgd_update(theta, grad, lr_mult * p.alpha);
            } else if constexpr (std::is_same_v<T, SgdmParams>) {
              sgdm_update(theta, grad, state, lr_mult * p.alpha, p.beta);
            } else if constexpr (std::is_same_v<T, AdamHyperParams>) {
              p.beta1 = beta1_t;
              adam_update(theta, grad, state, p, lr_mult);
            } else {
              p.adam.beta1 = beta1_t;
              miadam_update(theta, grad, state, p, lr_mult);
            }
          },
          cfg.params);
    } catch (const NonFiniteState&) {
      throw NonFiniteState("regret experiment diverged for '" + cfg.label + "'", t);
    }
  }
  return series;
}

}  // namespace flatmin
