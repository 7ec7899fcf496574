#include "flatmin/optim.hpp"

#include <cmath>
#include <string>

#include "flatmin/errors.hpp"

namespace flatmin {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
  if (a == 0) {
    throw ContractViolation(std::string(what) + ": empty parameter vector");
  }
}

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw NonFiniteInput(std::string(what) + " contains a non-finite entry");
    }
  }
}

void ensure_buffers(OptimizerState& state, std::size_t dim, std::size_t order) {
  if (state.step_t == 0 && state.m.empty() && state.v.empty() && state.mbar_stack.empty()) {
    state = OptimizerState::zeros(dim, static_cast<int>(order));
    return;
  }
  require_same_dim(state.m.size(), dim, "optimizer state m");
  require_same_dim(state.v.size(), dim, "optimizer state v");
  if (state.mbar_stack.size() != order) {
    throw ContractViolation("optimizer state holds " + std::to_string(state.mbar_stack.size()) +
                            " integral buffers, expected " + std::to_string(order));
  }
  for (const auto& buf : state.mbar_stack) {
    require_same_dim(buf.size(), dim, "optimizer state mbar");
  }
}

// Shared body of adam_update and miadam_update. With `mi == nullptr`, or once
// t >= switch_step, this is exactly the Adam update.
void adaptive_update(std::span<double> theta, std::span<const double> grad, OptimizerState& state,
                     const AdamHyperParams& hp, const MIAdamHyperParams* mi, double lr_multiplier) {
  require_same_dim(theta.size(), grad.size(), "adam step");
  require_finite(theta, "theta");
  require_finite(grad, "gradient");
  if (!std::isfinite(lr_multiplier) || lr_multiplier < 0.0) {
    throw ContractViolation("lr_multiplier must be finite and non-negative");
  }
  const std::size_t order = mi ? static_cast<std::size_t>(mi->order_n) : 0;
  ensure_buffers(state, theta.size(), order);

  const std::int64_t t = state.step_t + 1;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
  const bool integrate = mi != nullptr && t < mi->switch_step;
  const double alpha_t = integrate ? mi->pre_switch_lr() : hp.alpha;
  const double step_size = lr_multiplier * alpha_t;

  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i] + hp.weight_decay * theta[i];
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;

    double numer = state.m[i];
    if (integrate) {
      double lower = state.m[i];
      for (auto& level : state.mbar_stack) {
        level[i] = mi->kappa * level[i] + lower;
        lower = level[i];
      }
      numer = lower;
    }
    const double m_hat = numer / bc1;
    const double v_hat = state.v[i] / bc2;
    const double denom = hp.epsilon_placement == EpsilonPlacement::outside_sqrt
                             ? std::sqrt(v_hat) + hp.epsilon
                             : std::sqrt(v_hat + hp.epsilon);
    theta[i] -= step_size * m_hat / denom;

    if (!std::isfinite(theta[i]) || !std::isfinite(state.m[i]) || !std::isfinite(state.v[i]) ||
        !std::isfinite(numer)) {
      state.step_t = t;
      throw NonFiniteState("non-finite optimizer update", t);
    }
  }
  state.step_t = t;
}

}  // namespace

void AdamHyperParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ContractViolation("alpha must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ContractViolation("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ContractViolation("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ContractViolation("epsilon must be > 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ContractViolation("weight_decay must be >= 0");
  }
  if (!(beta1 * beta1 < std::sqrt(beta2))) {
    throw ContractViolation("beta1^2 / sqrt(beta2) must be < 1");
  }
}

void MIAdamHyperParams::validate() const {
  adam.validate();
  if (order_n < 1) throw ContractViolation("order_n must be >= 1");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw ContractViolation("kappa must lie in (0, 1]");
  if (switch_step < 1) throw ContractViolation("switch_step must be >= 1");
  if (pre_switch_lr_override && !(*pre_switch_lr_override > 0.0)) {
    throw ContractViolation("pre_switch_lr_override must be > 0");
  }
}

double MIAdamHyperParams::pre_switch_lr() const {
  if (pre_switch_lr_override) return *pre_switch_lr_override;
  return std::pow(adam.alpha, order_n);
}

OptimizerState OptimizerState::zeros(std::size_t dim, int order) {
  OptimizerState s;
  s.m.assign(dim, 0.0);
  s.v.assign(dim, 0.0);
  s.mbar_stack.assign(static_cast<std::size_t>(order), ParamVector(dim, 0.0));
  return s;
}

static void sgd_apply(std::span<double> theta, std::span<const double> grad, double alpha) {
  require_same_dim(theta.size(), grad.size(), "sgd step");
  require_finite(theta, "theta");
  require_finite(grad, "gradient");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    theta[i] -= alpha * grad[i];
    if (!std::isfinite(theta[i])) throw NonFiniteState("non-finite sgd update");
  }
}

static void sgdm_apply(std::span<double> theta, std::span<const double> grad, OptimizerState& state,
                double alpha, double beta) {
  require_same_dim(theta.size(), grad.size(), "sgdm step");
  if (!(beta >= 0.0 && beta < 1.0)) throw ContractViolation("beta must lie in [0, 1)");
  require_finite(theta, "theta");
  require_finite(grad, "gradient");
  ensure_buffers(state, theta.size(), 0);
  const std::int64_t t = state.step_t + 1;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = beta * state.m[i] + grad[i];
    theta[i] -= alpha * state.m[i];
    if (!std::isfinite(theta[i]) || !std::isfinite(state.m[i])) {
      state.step_t = t;
      throw NonFiniteState("non-finite momentum update", t);
    }
  }
  state.step_t = t;
}

void sgd_update(std::span<double> theta, std::span<const double> grad, double alpha) {
  if (!(alpha > 0.0)) throw ContractViolation("alpha must be > 0");
  sgd_apply(theta, grad, alpha);
}

void sgdm_update(std::span<double> theta, std::span<const double> grad, OptimizerState& state,
                 double alpha, double beta) {
  if (!(alpha > 0.0)) throw ContractViolation("alpha must be > 0");
  sgdm_apply(theta, grad, state, alpha, beta);
}

void adam_update(std::span<double> theta, std::span<const double> grad, OptimizerState& state,
                 const AdamHyperParams& hp, double lr_multiplier) {
  adaptive_update(theta, grad, state, hp, nullptr, lr_multiplier);
}

void miadam_update(std::span<double> theta, std::span<const double> grad, OptimizerState& state,
                   const MIAdamHyperParams& hp, double lr_multiplier) {
  adaptive_update(theta, grad, state, hp.adam, &hp, lr_multiplier);
}

ParamVector sgd_step(const ParamVector& theta, const ParamVector& grad, double alpha) {
  ParamVector out = theta;
  sgd_update(out, grad, alpha);
  return out;
}

StepResult sgdm_step(const ParamVector& theta, const ParamVector& grad, const OptimizerState& state,
                     double alpha, double beta) {
  StepResult r{theta, state};
  sgdm_update(r.theta, grad, r.state, alpha, beta);
  return r;
}

StepResult adam_step(const ParamVector& theta, const ParamVector& grad, const OptimizerState& state,
                     const AdamHyperParams& hp, double lr_multiplier) {
  StepResult r{theta, state};
  adam_update(r.theta, grad, r.state, hp, lr_multiplier);
  return r;
}

StepResult miadam_step(const ParamVector& theta, const ParamVector& grad, const OptimizerState& state,
                       const MIAdamHyperParams& hp, double lr_multiplier) {
  StepResult r{theta, state};
  miadam_update(r.theta, grad, r.state, hp, lr_multiplier);
  return r;
}

void OptimizerConfig::validate() const {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SgdParams>) {
          if (!(p.alpha > 0.0)) throw ContractViolation("sgd alpha must be > 0");
        } else if constexpr (std::is_same_v<T, SgdmParams>) {
          if (!(p.alpha > 0.0)) throw ContractViolation("sgdm alpha must be > 0");
          if (!(p.beta >= 0.0 && p.beta < 1.0)) throw ContractViolation("sgdm beta must lie in [0, 1)");
        } else {
          p.validate();
        }
      },
      params);
}

double OptimizerConfig::base_alpha() const {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MIAdamHyperParams>) {
          return p.adam.alpha;
        } else {
          return p.alpha;
        }
      },
      params);
}

std::string OptimizerConfig::kind_name() const {
  switch (params.index()) {
    case 0: return "sgd";
    case 1: return "sgdm";
    case 2: return "adam";
    default: return "miadam";
  }
}

Optimizer::Optimizer(OptimizerConfig config) : config_(std::move(config)) { config_.validate(); }

void Optimizer::step(std::span<double> theta, std::span<const double> grad, double lr_multiplier) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SgdParams>) {
          sgd_apply(theta, grad, lr_multiplier * p.alpha);
          ++state_.step_t;
        } else if constexpr (std::is_same_v<T, SgdmParams>) {
          sgdm_apply(theta, grad, state_, lr_multiplier * p.alpha, p.beta);
        } else if constexpr (std::is_same_v<T, AdamHyperParams>) {
          adam_update(theta, grad, state_, p, lr_multiplier);
        } else {
          miadam_update(theta, grad, state_, p, lr_multiplier);
        }
      },
      config_.params);
}

}  // namespace flatmin
