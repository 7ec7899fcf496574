#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "flatmin/optim.hpp"

namespace flatmin {

/// Gradient oracle: parameters -> gradient of the loss being analysed.
using GradFn = std::function<ParamVector(const ParamVector&)>;

/// Default finite-difference step for hvp: 1e-4 * (1 + |theta|).
double default_hvp_step(const ParamVector& theta);

/// Hessian-vector product by central differences of the gradient along the
/// unit direction vec / |vec|, rescaled by |vec|.
ParamVector hvp(const GradFn& grad_fn, const ParamVector& theta, const ParamVector& vec, double h);

struct EigenEstimate {
  double value = 0.0;  // signed Rayleigh quotient of the dominant-magnitude eigenvalue
  int iterations = 0;
  int hvp_count = 0;
  bool tolerance_reached = false;
};

/// Power iteration on H from a seeded random unit vector. Stops when two
/// successive Rayleigh quotients differ by less than `tol`; running out of
/// iterations is reported through tolerance_reached, not an exception.
EigenEstimate top_eigenvalue(const GradFn& grad_fn, const ParamVector& theta, int max_iters, double tol,
                             std::uint64_t seed, std::optional<double> h = std::nullopt);

struct TraceEstimate {
  double value = 0.0;
  /// Standard error of the mean over probes; empty when probe_count == 1.
  std::optional<double> std_error;
  int probe_count = 0;
  int hvp_count = 0;
};

/// Hutchinson estimator: mean of z^T H z over Rademacher probes z. Probe
/// vectors are drawn sequentially from `seed` before any product is taken, so
/// the result is independent of evaluation order.
TraceEstimate hutchinson_trace(const GradFn& grad_fn, const ParamVector& theta, int probes,
                               std::uint64_t seed, std::optional<double> h = std::nullopt);

struct HessianSummary {
  double top_eigenvalue = 0.0;
  double trace_estimate = 0.0;
  std::optional<double> trace_std_error;
  int hvp_count = 0;
  int probe_count = 0;
  bool tolerance_reached = false;
};

HessianSummary summarize(const EigenEstimate& eig, const TraceEstimate& trace);

}  // namespace flatmin
