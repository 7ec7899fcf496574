#include "flatmin/hessian.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "flatmin/errors.hpp"

namespace flatmin {

namespace {

double norm(const ParamVector& x) { return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0)); }

double dot(const ParamVector& a, const ParamVector& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

double default_hvp_step(const ParamVector& theta) { return 1e-4 * (1.0 + norm(theta)); }

ParamVector hvp(const GradFn& grad_fn, const ParamVector& theta, const ParamVector& vec, double h) {
  if (vec.size() != theta.size()) throw ContractViolation("hvp: direction and theta differ in dimension");
  if (!(h > 0.0)) throw ContractViolation("hvp: step h must be > 0");
  const double scale = norm(vec);
  if (!(scale > 0.0)) throw ContractViolation("hvp: direction must be non-zero");

  ParamVector plus(theta.size()), minus(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    plus[i] = theta[i] + h * vec[i] / scale;
    minus[i] = theta[i] - h * vec[i] / scale;
  }
  const ParamVector gp = grad_fn(plus);
  const ParamVector gm = grad_fn(minus);
  if (gp.size() != theta.size() || gm.size() != theta.size()) {
    throw ContractViolation("hvp: gradient has the wrong dimension");
  }
  ParamVector out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out[i] = (gp[i] - gm[i]) * scale / (2.0 * h);
    if (!std::isfinite(out[i])) throw NonFiniteState("hvp: non-finite gradient difference");
  }
  return out;
}

EigenEstimate top_eigenvalue(const GradFn& grad_fn, const ParamVector& theta, int max_iters, double tol,
                             std::uint64_t seed, std::optional<double> h) {
  if (max_iters < 1) throw ContractViolation("top_eigenvalue: max_iters must be >= 1");
  if (theta.empty()) throw ContractViolation("top_eigenvalue: empty theta");
  const double step = h.value_or(default_hvp_step(theta));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ParamVector v(theta.size());
  for (auto& x : v) x = gauss(rng);
  double n = norm(v);
  for (auto& x : v) x /= n;

  EigenEstimate est;
  double previous = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    ParamVector hv = hvp(grad_fn, theta, v, step);
    ++est.hvp_count;
    const double rayleigh = dot(v, hv);
    est.value = rayleigh;
    est.iterations = it;
    if (it > 1 && std::abs(rayleigh - previous) < tol) {
      est.tolerance_reached = true;
      break;
    }
    previous = rayleigh;
    n = norm(hv);
    if (n == 0.0) {
      // v is in the null space; the Hessian has no nonzero action along it
      est.tolerance_reached = true;
      break;
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = hv[i] / n;
  }
  return est;
}

TraceEstimate hutchinson_trace(const GradFn& grad_fn, const ParamVector& theta, int probes,
                               std::uint64_t seed, std::optional<double> h) {
  if (probes < 1) throw ContractViolation("hutchinson_trace: probes must be >= 1");
  const double step = h.value_or(default_hvp_step(theta));

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<ParamVector> zs(static_cast<std::size_t>(probes), ParamVector(theta.size()));
  for (auto& z : zs) {
    for (auto& x : z) x = coin(rng) ? 1.0 : -1.0;
  }

  std::vector<double> samples;
  samples.reserve(zs.size());
  for (const auto& z : zs) samples.push_back(dot(z, hvp(grad_fn, theta, z, step)));

  TraceEstimate est;
  est.probe_count = probes;
  est.hvp_count = probes;
  est.value = std::accumulate(samples.begin(), samples.end(), 0.0) / probes;
  if (probes > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - est.value) * (s - est.value);
    est.std_error = std::sqrt(ss / (probes - 1)) / std::sqrt(static_cast<double>(probes));
  }
  return est;
}

HessianSummary summarize(const EigenEstimate& eig, const TraceEstimate& trace) {
  HessianSummary s;
  s.top_eigenvalue = eig.value;
  s.trace_estimate = trace.value;
  s.trace_std_error = trace.std_error;
  s.hvp_count = eig.hvp_count + trace.hvp_count;
  s.probe_count = trace.probe_count;
  s.tolerance_reached = eig.tolerance_reached;
  return s;
}

}  // namespace flatmin
