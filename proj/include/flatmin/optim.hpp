#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace flatmin {

/// Flat float64 parameter (or gradient) vector. Dimension is fixed for the
/// lifetime of a run.
using ParamVector = std::vector<double>;

/// Where epsilon enters the Adam denominator: sqrt(v_hat) + eps (the
/// executable form, default) or sqrt(v_hat + eps) (kept for ablations).
enum class EpsilonPlacement { outside_sqrt, inside_sqrt };

struct AdamHyperParams {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Coupled L2: added to the gradient before the moment updates.
  double weight_decay = 0.0;
  EpsilonPlacement epsilon_placement = EpsilonPlacement::outside_sqrt;

  /// Throws ContractViolation on out-of-range values, including
  /// beta1^2 / sqrt(beta2) >= 1.
  void validate() const;
};

/// Adam plus an order-n stack of leaky running sums of the first moment,
/// used until `switch_step`, after which the update is plain Adam.
struct MIAdamHyperParams {
  AdamHyperParams adam;
  int order_n = 1;
  double kappa = 0.98;
  std::int64_t switch_step = 20;
  /// Replaces alpha^n as the pre-switch learning rate when set.
  std::optional<double> pre_switch_lr_override;

  void validate() const;
  double pre_switch_lr() const;
  /// Orders above 3 run, but are outside the exercised range.
  bool order_untested() const noexcept { return order_n > 3; }
};

/// Switch step that is never reached.
inline constexpr std::int64_t kNeverSwitch = std::numeric_limits<std::int64_t>::max();

struct OptimizerState {
  std::int64_t step_t = 0;
  ParamVector m;
  ParamVector v;
  /// mbar^(1)..mbar^(n); empty for SGD/SGDM/Adam.
  std::vector<ParamVector> mbar_stack;

  static OptimizerState zeros(std::size_t dim, int order = 0);
  std::size_t dimension() const noexcept { return m.size(); }
};

struct StepResult {
  ParamVector theta;
  OptimizerState state;
};

// Value-semantics steps. Inputs are never modified.
ParamVector sgd_step(const ParamVector& theta, const ParamVector& grad, double alpha);
StepResult sgdm_step(const ParamVector& theta, const ParamVector& grad, const OptimizerState& state,
                     double alpha, double beta);
StepResult adam_step(const ParamVector& theta, const ParamVector& grad, const OptimizerState& state,
                     const AdamHyperParams& hp, double lr_multiplier = 1.0);
StepResult miadam_step(const ParamVector& theta, const ParamVector& grad, const OptimizerState& state,
                       const MIAdamHyperParams& hp, double lr_multiplier = 1.0);

// In-place variants; the value-semantics steps are thin wrappers over these.
// A state with step_t == 0 and empty buffers is sized on first use.
void sgd_update(std::span<double> theta, std::span<const double> grad, double alpha);
void sgdm_update(std::span<double> theta, std::span<const double> grad, OptimizerState& state,
                 double alpha, double beta);
void adam_update(std::span<double> theta, std::span<const double> grad, OptimizerState& state,
                 const AdamHyperParams& hp, double lr_multiplier = 1.0);
void miadam_update(std::span<double> theta, std::span<const double> grad, OptimizerState& state,
                   const MIAdamHyperParams& hp, double lr_multiplier = 1.0);

struct SgdParams {
  double alpha = 1e-2;
};

struct SgdmParams {
  double alpha = 1e-2;
  double beta = 0.9;
};

using OptimizerParams = std::variant<SgdParams, SgdmParams, AdamHyperParams, MIAdamHyperParams>;

struct OptimizerConfig {
  std::string label;
  OptimizerParams params;

  void validate() const;
  /// Base learning rate alpha of whichever optimizer this is.
  double base_alpha() const;
  std::string kind_name() const;
};

/// Owns one run's optimizer state and dispatches to the matching update rule.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  void step(std::span<double> theta, std::span<const double> grad, double lr_multiplier = 1.0);

  const OptimizerState& state() const noexcept { return state_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  OptimizerState state_;
};

}  // namespace flatmin
