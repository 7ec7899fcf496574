// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "flatmin/config.hpp"
#include "flatmin/harness.hpp"
#include "flatmin/hessian.hpp"
#include "flatmin/landscape.hpp"
#include "flatmin/mlp.hpp"
#include "flatmin/optim.hpp"
#include "flatmin/parallel.hpp"
#include "flatmin/presets.hpp"
#include "flatmin/theory.hpp"

using namespace flatmin;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <class... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::vector<ParamVector> gaussian_sequence(std::mt19937_64& rng, std::size_t steps, std::size_t dim) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<ParamVector> out(steps, ParamVector(dim));
  for (auto& g : out)
    for (auto& x : g) x = n01(rng);
  return out;
}

Outcome momentum_identity() {
  std::mt19937_64 rng(101);
  const AdamHyperParams hp;
  double worst = 0.0;
  for (int seq = 0; seq < 100; ++seq) {
    const auto gs = gaussian_sequence(rng, 200, 16);
    ParamVector theta(16, 0.0);
    OptimizerState st;
    for (std::size_t t = 1; t <= gs.size(); ++t) {
      adam_update(theta, gs[t - 1], st, hp);
      for (std::size_t i = 0; i < 16; ++i) {
        double sum = 0.0;
        for (std::size_t j = 1; j <= t; ++j) sum += std::pow(hp.beta1, double(t - j)) * gs[j - 1][i];
        worst = std::max(worst, std::abs(st.m[i] - (1.0 - hp.beta1) * sum));
      }
    }
  }
  return {worst < 1e-12, fmt("max abs error %.3e (limit 1e-12)", worst)};
}

double nested_sum(const std::vector<double>& m, int k, std::size_t t, double kappa) {
  if (k == 0) return m[t - 1];
  double acc = 0.0;
  for (std::size_t s = 1; s <= t; ++s) acc += std::pow(kappa, double(t - s)) * nested_sum(m, k - 1, s, kappa);
  return acc;
}

Outcome recurrence_vs_summation() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int n : {1, 2, 3}) {
    for (double kappa : {0.5, 0.98, 1.0}) {
      MIAdamHyperParams hp;
      hp.order_n = n;
      hp.kappa = kappa;
      hp.switch_step = kNeverSwitch;
      const std::size_t dim = 4;
      const auto gs = gaussian_sequence(rng, 50, dim);
      ParamVector theta(dim, 0.0);
      OptimizerState st;
      std::vector<std::vector<double>> hist(dim);
      for (std::size_t t = 1; t <= gs.size(); ++t) {
        miadam_update(theta, gs[t - 1], st, hp);
        for (std::size_t i = 0; i < dim; ++i) {
          hist[i].push_back(st.m[i]);
          worst = std::max(worst, std::abs(st.mbar_stack.back()[i] - nested_sum(hist[i], n, t, kappa)));
        }
      }
    }
  }
  return {worst < 1e-10, fmt("max abs error %.3e over n in {1,2,3}, kappa in {0.5,0.98,1} (limit 1e-10)", worst)};
}

Outcome post_switch_equivalence() {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_int_distribution<int> order(1, 3), dim(1, 32);
  std::uniform_int_distribution<std::int64_t> zeta(1, 1000), extra(0, 1000);
  std::uniform_real_distribution<double> kappa(0.01, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    MIAdamHyperParams mi;
    mi.order_n = order(rng);
    mi.kappa = kappa(rng);
    mi.switch_step = zeta(rng);
    mi.adam.alpha = std::exp(n01(rng) - 5.0);
    mi.adam.weight_decay = trial % 2 ? 5e-5 : 0.0;
    const auto d = static_cast<std::size_t>(dim(rng));
    auto st = OptimizerState::zeros(d, mi.order_n);
    st.step_t = mi.switch_step - 1 + extra(rng);
    ParamVector theta(d), g(d);
    for (std::size_t i = 0; i < d; ++i) {
      theta[i] = n01(rng);
      g[i] = n01(rng);
      st.m[i] = n01(rng);
      st.v[i] = std::abs(n01(rng));
      for (auto& lvl : st.mbar_stack) lvl[i] = n01(rng);
    }
    auto plain = st;
    plain.mbar_stack.clear();
    const auto a = miadam_step(theta, g, st, mi);
    const auto b = adam_step(theta, g, plain, mi.adam);
    if (a.theta != b.theta || a.state.m != b.state.m || a.state.v != b.state.v) ++mismatches;
  }
  return {mismatches == 0, fmt("%d of 1000 randomized post-switch states differ bitwise", mismatches)};
}

Outcome mlp_gradients() {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_int_distribution<int> width(1, 8), depth(0, 2), classes(2, 5), batch(1, 12);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    MlpSpec spec;
    spec.activation = c % 2 ? Activation::relu : Activation::tanh;
    spec.layer_sizes.push_back(static_cast<std::size_t>(width(rng)));
    for (int h = depth(rng); h > 0; --h) spec.layer_sizes.push_back(static_cast<std::size_t>(width(rng)));
    const int k = classes(rng);
    spec.layer_sizes.push_back(static_cast<std::size_t>(k));
    ParamVector p(spec.parameter_count());
    for (auto& x : p) x = 0.7 * n01(rng);
    Batch b;
    b.input_dim = spec.layer_sizes.front();
    const int n = batch(rng);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * b.input_dim; ++i) b.inputs.push_back(n01(rng));
    for (int i = 0; i < n; ++i) b.labels.push_back(static_cast<int>(rng() % static_cast<unsigned>(k)));

    const auto grad = backward(Mlp(spec, p), b);
    ParamVector fd(p.size());
    const double h = 1e-5;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double keep = p[i];
      p[i] = keep + h;
      const double fp = forward_loss(Mlp(spec, p), b).loss;
      p[i] = keep - h;
      const double fm = forward_loss(Mlp(spec, p), b).loss;
      p[i] = keep;
      fd[i] = (fp - fm) / (2 * h);
    }
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      diff = std::max(diff, std::abs(grad[i] - fd[i]));
      scale = std::max(scale, std::abs(fd[i]));
    }
    worst = std::max(worst, diff / std::max(scale, 1e-12));
  }
  return {worst < 1e-5, fmt("max relative error %.3e over 100 random models (limit 1e-5)", worst)};
}

EscapeScenario random_scenario(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return std::exp(std::log(lo) + u01(rng) * std::log(hi / lo)); };
  EscapeScenario s;
  s.alpha = log_uniform(1e-4, 0.5);
  s.beta1 = 0.99 * u01(rng);
  s.batch_size = 1 + static_cast<std::int64_t>(u01(rng) * 511);
  s.delta_L = log_uniform(1e-5, 1.0);
  const std::size_t d = 1 + rng() % 5;
  s.escape_index = rng() % d;
  for (std::size_t i = 0; i < d; ++i) {
    s.h_a_eigs.push_back(log_uniform(1e-2, 1e2));
    const double mag = log_uniform(1e-2, 1e2);
    s.h_u_eigs.push_back(i == s.escape_index ? -mag : mag);
  }
  s.rho = u01(rng);
  s.t_tilde = 1.0;
  return s;
}

Outcome escape_times() {
  std::mt19937_64 rng(505);
  // Relative error of phi equals the absolute error of log(phi) to first order.
  double worst_equal = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto s = random_scenario(rng);
    worst_equal = std::max(worst_equal, std::abs(std::expm1(escape_time_miadam1(s).log_value - escape_time_adam(s).log_value)));
  }
  int not_smaller = 0;
  std::uniform_real_distribution<double> tt(1.0 + 1e-6, 100.0);
  for (int k = 0; k < 1000; ++k) {
    auto s = random_scenario(rng);
    s.t_tilde = tt(rng);
    if (!(escape_time_miadam1(s).log_value < escape_time_adam(s).log_value)) ++not_smaller;
  }
  EscapeScenario p;
  p.alpha = 1e-3;
  p.beta1 = 0.9;
  p.batch_size = 128;
  p.delta_L = 0.1;
  p.h_a_eigs = {10.0, 2.0};
  p.h_u_eigs = {-5.0, 2.0};
  p.escape_index = 0;
  p.rho = 0.5;
  p.t_tilde = 4.0;
  // 60-digit reference values (tests/oracles/escape_time_mpmath.py).
  const double ref_mi = 6.72972606519365578911031384283e+93;
  const double ref_log_adam = 863.980423615289612508014501278;
  const auto mi = escape_time_miadam1(p);
  const auto adam = escape_time_adam(p);
  const double err_mi = std::abs(mi.value / ref_mi - 1.0);
  const double err_adam = std::abs(std::expm1(adam.log_value - ref_log_adam));
  const bool pass = worst_equal <= 1e-12 && not_smaller == 0 && err_mi < 1e-10 && err_adam < 1e-10;
  return {pass, fmt("(a) max rel diff %.2e at t~=1; (b) %d of 1000 not smaller for t~>1; (c) rel err MIAdam1 %.2e, Adam %.2e "
                    "(Adam value overflows double, compared through its log)",
                    worst_equal, not_smaller, err_mi, err_adam)};
}

Outcome landscape_a_trajectories() {
  const auto spec = landscape_a();
  std::vector<Vec2> starts;
  for (std::size_t w : {1, 2}) {
    const auto& well = spec.wells[w];
    for (int k = 0; k < 5; ++k) {
      const double angle = 2.0 * M_PI * k / 5.0;
      const double r = 0.4 * well.width;
      starts.push_back({well.center[0] + r * std::cos(angle), well.center[1] + r * std::sin(angle)});
    }
  }
  const auto sched = LrSchedule::cosine(kSimulationSteps);
  bool pass = true;
  std::string detail;
  for (double alpha : {0.05, 0.1, 0.15}) {
    auto adam = adam_default();
    adam.alpha = alpha;
    auto mi = miadam_simulation();
    mi.adam.alpha = alpha;
    double fa = 0.0, fm = 0.0;
    for (const auto& s : starts) {
      fa += simulate_trajectory(spec, s, {"adam", adam}, sched, kSimulationSteps, false).flatness;
      fm += simulate_trajectory(spec, s, {"miadam1", mi}, sched, kSimulationSteps, false).flatness;
    }
    fa /= starts.size();
    fm /= starts.size();
    pass = pass && fm < fa;
    detail += fmt("alpha=%.2f MIAdam1 %.3f vs Adam %.3f; ", alpha, fm, fa);
  }
  return {pass, detail + "mean flatness over 10 starts near the sharp wells"};
}

Outcome grid_flatness() {
  auto cfg = parse_config_text(R"({
    "kind": "grid-flatness",
    "landscape": {"preset": "landscape-B"},
    "grid": {"points": [50, 50], "total_steps": 1500},
    "optimizers": [
      {"preset": "adam-default", "label": "adam", "alpha": 0.005},
      {"preset": "miadam-simulation", "label": "miadam2", "alpha": 0.005, "order_n": 2, "pre_switch_lr": "gain_matched"},
      {"preset": "miadam-simulation", "label": "miadam3", "alpha": 0.005, "order_n": 3, "pre_switch_lr": "gain_matched"}
    ]})");
  const auto out = execute(cfg);
  const auto& opts = out.report["results"]["optimizers"];
  const double adam = opts[0]["mean_flatness"], mi2 = opts[1]["mean_flatness"], mi3 = opts[2]["mean_flatness"];
  return {mi2 < adam && mi3 < adam,
          fmt("2500 starts: mean flatness Adam %.3f, MIAdam2 %.3f, MIAdam3 %.3f (pre-switch rate alpha*(1-kappa)^(n-1))",
              adam, mi2, mi3)};
}

Outcome regret_divergence() {
  auto cfg = parse_config_text(R"({
    "kind": "regret",
    "optimizers": [
      {"name": "adam", "label": "adam", "alpha": 0.1},
      {"name": "miadam", "label": "miadam1", "alpha": 0.1, "kappa": 0.98}
    ]})");
  const auto out = execute(cfg);
  const auto& opts = out.report["results"]["optimizers"];
  const double adam_100 = opts[0]["average_regret_at_100"], adam_end = opts[0]["final_average_regret"];
  const double mi_end = opts[1]["final_average_regret"];
  const bool pass = std::abs(adam_end) < 0.01 * adam_100 && mi_end > 10.0 * std::abs(adam_end);
  return {pass, fmt("Adam R/t: %.4e at t=100, %.4e at 1e5 (|ratio| %.4f); MIAdam1 R/t at 1e5 %.4e (%.0fx Adam)", adam_100,
                    adam_end, std::abs(adam_end) / adam_100, mi_end, mi_end / std::abs(adam_end))};
}

Outcome label_noise() {
  const std::vector<double> rates{0.2, 0.4, 0.6};
  const int seeds = 5;
  std::vector<ExperimentConfig> cfgs;
  for (double rate : rates) {
    for (int s = 0; s < seeds; ++s) {
      json j = json::parse(R"({
        "kind": "train",
        "dataset": {"preset": "blobs-4c"},
        "model": {"hidden": [32], "activation": "tanh"},
        "training": {"epochs": 150, "batch_size": 128},
        "schedule": {"kind": "milestones", "milestones": [50, 75], "gamma": 0.1},
        "optimizers": [{"preset": "adam-default", "label": "adam"},
                       {"preset": "miadam-label-noise", "label": "miadam1"}]})");
      j["seed"] = 1000 + s;
      j["dataset"]["noise_rate"] = rate;
      cfgs.push_back(parse_config(j));
    }
  }
  std::vector<std::array<double, 2>> acc(cfgs.size());
  parallel_for(cfgs.size(), [&](std::size_t i) {
    const auto out = execute(cfgs[i]);
    for (int k = 0; k < 2; ++k) acc[i][k] = out.report["results"]["optimizers"][k]["final"]["test_acc"];
  });
  bool pass = true;
  std::string detail;
  for (std::size_t r = 0; r < rates.size(); ++r) {
    std::vector<double> a, m;
    for (int s = 0; s < seeds; ++s) {
      a.push_back(acc[r * seeds + s][0]);
      m.push_back(acc[r * seeds + s][1]);
    }
    const double ma = median(a), mm = median(m);
    pass = pass && mm >= ma;
    detail += fmt("noise %.1f: MIAdam1 %.4f vs Adam %.4f; ", rates[r], mm, ma);
  }
  return {pass, detail + "median final test accuracy over 5 seeds"};
}

GradFn quadratic_grad(const Eigen::MatrixXd& a) {
  return [a](const ParamVector& x) {
    const Eigen::VectorXd g = a * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    return ParamVector(g.data(), g.data() + g.size());
  };
}

Outcome hessian_toolkit() {
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> rest(-1.0, 1.0), top(1.2, 5.0), diag(0.1, 10.0);
  const int d = 30;
  double worst_eig = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = n01(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
    Eigen::VectorXd ev(d);
    for (int i = 0; i < d; ++i) ev(i) = rest(rng);
    ev(0) = top(rng) * (trial % 2 ? -1.0 : 1.0);
    const Eigen::MatrixXd a = q * ev.asDiagonal() * q.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const auto& w = es.eigenvalues();
    const double ref = std::abs(w(0)) > std::abs(w(d - 1)) ? w(0) : w(d - 1);
    const auto est = top_eigenvalue(quadratic_grad(a), ParamVector(d, 0.0), 10000, 1e-14, rng());
    worst_eig = std::max(worst_eig, std::abs(est.value - ref) / std::abs(ref));
  }
  double worst_trace = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd dg(d);
    for (int i = 0; i < d; ++i) dg(i) = diag(rng);
    const Eigen::MatrixXd a = dg.asDiagonal();
    const auto est = hutchinson_trace(quadratic_grad(a), ParamVector(d, 0.0), 1000, rng());
    worst_trace = std::max(worst_trace, std::abs(est.value - dg.sum()) / dg.sum());
  }
  return {worst_eig < 1e-4 && worst_trace < 0.02,
          fmt("top eigenvalue max rel err %.2e (limit 1e-4, 20 gapped 30-dim spectra); trace max rel err %.2e (limit 0.02)",
              worst_eig, worst_trace)};
}

Outcome determinism() {
  const std::vector<std::string> configs{
      R"({"kind":"trajectory","seed":4,"landscape":{"preset":"landscape-A"},"optimizers":[{"preset":"adam-default","label":"adam","alpha":0.1},{"preset":"miadam-simulation","label":"mi","alpha":0.1}]})",
      R"({"kind":"grid-flatness","seed":4,"landscape":{"preset":"landscape-B"},"grid":{"points":[8,8],"total_steps":300},"optimizers":[{"preset":"adam-default","alpha":0.005},{"preset":"miadam-simulation","order_n":2,"pre_switch_lr":"gain_matched","alpha":0.005}]})",
      R"({"kind":"train","seed":4,"dataset":{"preset":"blobs-4c","noise_rate":0.4},"training":{"epochs":12},"schedule":{"kind":"milestones","milestones":[6]},"optimizers":[{"preset":"adam-default"},{"preset":"miadam-label-noise","switch_epochs":5}]})",
      R"({"kind":"regret","seed":4,"regret":{"horizon":5000},"optimizers":[{"name":"adam","alpha":0.1},{"name":"miadam","alpha":0.1}]})",
      R"({"kind":"hessian-report","seed":4,"dataset":{"preset":"blobs-4c"},"model":{"hidden":[8]},"training":{"epochs":4},"hessian":{"probes":20,"max_iters":100},"optimizers":[{"preset":"adam-default"}]})",
      R"({"kind":"escape-theory","scenario":{"h_a_eigs":[10,2],"h_u_eigs":[-5,2],"t_tilde":4}})"};
  int compared = 0, differing = 0;
  for (const auto& text : configs) {
    const auto first = execute(parse_config_text(text));
    const auto again = execute(parse_config(first.report["config"]));
    if (first.report["results"] != again.report["results"]) ++differing;
    if (first.files.size() != again.files.size()) {
      ++differing;
      continue;
    }
    for (std::size_t i = 0; i < first.files.size(); ++i) {
      ++compared;
      if (first.files[i].name != again.files[i].name || first.files[i].contents != again.files[i].contents) ++differing;
    }
  }
  return {differing == 0, fmt("%d CSV files across 6 run kinds re-executed from embedded configs; %d differences", compared,
                              differing)};
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"1 momentum identity", 5.0, momentum_identity},
      {"2 stack recurrence vs nested sums", 10.0, recurrence_vs_summation},
      {"3 post-switch equals Adam", 0.0, post_switch_equivalence},
      {"4 MLP gradients vs finite differences", 30.0, mlp_gradients},
      {"5 escape-time formulas", 0.0, escape_times},
      {"6 landscape-A flatness", 60.0, landscape_a_trajectories},
      {"7 landscape-B grid flatness", 600.0, grid_flatness},
      {"8 regret divergence", 120.0, regret_divergence},
      {"9 label-noise robustness", 300.0, label_noise},
      {"10 Hessian toolkit", 0.0, hessian_toolkit},
      {"11 determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0.0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += fmt(" [runtime %.1fs exceeds %.0fs]", secs, c.limit_seconds);
    }
    failed += !o.pass;
    std::printf("%s  C%-38s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
