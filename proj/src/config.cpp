#include "flatmin/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "flatmin/errors.hpp"

namespace flatmin {

using nlohmann::json;

namespace {

std::string child(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

std::int64_t as_int(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9.0e15) return static_cast<std::int64_t>(x);
  }
  throw ConfigError(path, "expected an integer");
}

std::uint64_t as_uint64(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const std::int64_t x = as_int(j, path);
  if (x < 0) throw ConfigError(path, "expected a non-negative integer");
  return static_cast<std::uint64_t>(x);
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_double_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], child(path, i)));
  return out;
}

Vec2 as_vec2(const json& j, const std::string& path) {
  const auto xs = as_double_list(j, path);
  if (xs.size() != 2) throw ConfigError(path, "expected exactly two numbers");
  return {xs[0], xs[1]};
}

// Strict view over a JSON object: every key must be consumed before finish().
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  std::string path(std::string_view key) const { return child(path_, key); }

  const json& at(std::string_view key) {
    const std::string k(key);
    if (!j_.contains(k)) throw ConfigError(path(key), "required field is missing");
    used_.insert(k);
    return j_.at(k);
  }

  double number(std::string_view key, double fallback) {
    return has(key) ? as_double(at(key), path(key)) : fallback;
  }
  std::int64_t integer(std::string_view key, std::int64_t fallback) {
    return has(key) ? as_int(at(key), path(key)) : fallback;
  }
  std::string string(std::string_view key, std::string fallback) {
    return has(key) ? as_string(at(key), path(key)) : fallback;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(path(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

ExperimentKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "trajectory") return ExperimentKind::trajectory;
  if (s == "grid-flatness") return ExperimentKind::grid_flatness;
  if (s == "train") return ExperimentKind::train;
  if (s == "escape-theory") return ExperimentKind::escape_theory;
  if (s == "regret") return ExperimentKind::regret;
  if (s == "hessian-report") return ExperimentKind::hessian_report;
  throw ConfigError(path, "unknown kind '" + s + "'");
}

bool trains_models(ExperimentKind k) {
  return k == ExperimentKind::train || k == ExperimentKind::hessian_report;
}

// Rethrows library contract violations as config errors at `path`.
template <class F>
void checked(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ContractViolation& e) {
    throw ConfigError(path, e.what());
  }
}

bool valid_label(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

LrSchedule parse_schedule(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string kind = f.string("kind", "constant");
  LrSchedule s;
  if (kind == "constant") {
    s = LrSchedule::constant();
  } else if (kind == "cosine_annealing") {
    s = LrSchedule::cosine(f.integer("total_steps", 0), f.number("eta_min", 0.0));
  } else if (kind == "milestones") {
    std::vector<std::int64_t> ms;
    const json& arr = f.at("milestones");
    if (!arr.is_array()) throw ConfigError(f.path("milestones"), "expected an array of integers");
    for (std::size_t i = 0; i < arr.size(); ++i) ms.push_back(as_int(arr[i], child(f.path("milestones"), i)));
    s = LrSchedule::step_decay(std::move(ms), f.number("gamma", 0.1));
  } else {
    throw ConfigError(f.path("kind"), "unknown schedule kind '" + kind + "'");
  }
  f.finish();
  checked(path, [&] { s.validate(); });
  return s;
}

OptimizerBlock parse_optimizer(const json& j, const std::string& path, ExperimentKind exp_kind) {
  Fields f(j, path);
  OptimizerBlock block;
  std::string name;
  std::string preset;
  if (f.has("preset")) {
    preset = as_string(f.at("preset"), f.path("preset"));
    if (preset == "adam-default") {
      name = "adam";
      block.config.params = adam_default();
    } else if (preset == "miadam-default" || preset == "miadam-label-noise") {
      name = "miadam";
      block.config.params = miadam_default();
      block.switch_epochs =
          preset == "miadam-default" ? kMiadamDefaultSwitchEpochs : kMiadamLabelNoiseSwitchEpochs;
    } else if (preset == "miadam-simulation") {
      name = "miadam";
      block.config.params = miadam_simulation();
    } else {
      throw ConfigError(f.path("preset"), "unknown optimizer preset '" + preset + "'");
    }
    if (f.has("name") && as_string(f.at("name"), f.path("name")) != name) {
      throw ConfigError(f.path("name"), "conflicts with preset '" + preset + "'");
    }
  } else {
    name = as_string(f.at("name"), f.path("name"));
    if (name == "sgd") {
      block.config.params = SgdParams{};
    } else if (name == "sgdm") {
      block.config.params = SgdmParams{};
    } else if (name == "adam") {
      block.config.params = AdamHyperParams{};
    } else if (name == "miadam") {
      block.config.params = MIAdamHyperParams{};
    } else {
      throw ConfigError(f.path("name"), "unknown optimizer '" + name + "'");
    }
  }
  block.config.label = f.string("label", preset.empty() ? name : preset);
  if (!valid_label(block.config.label)) {
    throw ConfigError(f.path("label"), "labels may only use letters, digits, '-', '_' and '.'");
  }

  auto read_adam = [&](AdamHyperParams& hp) {
    hp.alpha = f.number("alpha", hp.alpha);
    hp.beta1 = f.number("beta1", hp.beta1);
    hp.beta2 = f.number("beta2", hp.beta2);
    hp.epsilon = f.number("epsilon", hp.epsilon);
    hp.weight_decay = f.number("weight_decay", hp.weight_decay);
    if (f.has("epsilon_placement")) {
      const auto p = as_string(f.at("epsilon_placement"), f.path("epsilon_placement"));
      if (p == "outside_sqrt") {
        hp.epsilon_placement = EpsilonPlacement::outside_sqrt;
      } else if (p == "inside_sqrt") {
        hp.epsilon_placement = EpsilonPlacement::inside_sqrt;
      } else {
        throw ConfigError(f.path("epsilon_placement"), "expected 'outside_sqrt' or 'inside_sqrt'");
      }
    }
  };

  if (auto* p = std::get_if<SgdParams>(&block.config.params)) {
    p->alpha = f.number("alpha", p->alpha);
  } else if (auto* p = std::get_if<SgdmParams>(&block.config.params)) {
    p->alpha = f.number("alpha", p->alpha);
    p->beta = f.number("beta", p->beta);
  } else if (auto* p = std::get_if<AdamHyperParams>(&block.config.params)) {
    read_adam(*p);
  } else if (auto* p = std::get_if<MIAdamHyperParams>(&block.config.params)) {
    read_adam(p->adam);
    const std::int64_t order = f.integer("order_n", p->order_n);
    if (order < 1 || order > 64) throw ConfigError(f.path("order_n"), "order_n must lie in [1, 64]");
    p->order_n = static_cast<int>(order);
    p->kappa = f.number("kappa", p->kappa);
    if (f.has("switch_step") && f.has("switch_epochs")) {
      throw ConfigError(f.path("switch_epochs"), "give either switch_step or switch_epochs, not both");
    }
    if (f.has("switch_step")) {
      p->switch_step = f.integer("switch_step", p->switch_step);
      block.switch_epochs.reset();
    }
    if (f.has("switch_epochs")) {
      block.switch_epochs = f.integer("switch_epochs", 0);
      if (*block.switch_epochs < 1) throw ConfigError(f.path("switch_epochs"), "must be >= 1");
    }
    if (block.switch_epochs && !trains_models(exp_kind)) {
      throw ConfigError(path, "switch_epochs only applies to train and hessian-report runs; give switch_step");
    }
    if (f.has("pre_switch_lr")) {
      const json& v = f.at("pre_switch_lr");
      if (v.is_string()) {
        const auto mode = v.get<std::string>();
        if (mode == "alpha_pow_n") {
          block.pre_switch_mode = PreSwitchLr::alpha_pow_n;
        } else if (mode == "gain_matched") {
          block.pre_switch_mode = PreSwitchLr::gain_matched;
        } else {
          throw ConfigError(f.path("pre_switch_lr"), "expected 'alpha_pow_n', 'gain_matched' or a number");
        }
      } else {
        block.pre_switch_mode = PreSwitchLr::fixed;
        p->pre_switch_lr_override = as_double(v, f.path("pre_switch_lr"));
      }
    }
  }
  f.finish();
  checked(path, [&] { resolve_optimizer(block).validate(); });
  return block;
}

WellSpec parse_well(const json& j, const std::string& path) {
  Fields f(j, path);
  WellSpec w;
  w.center = as_vec2(f.at("center"), f.path("center"));
  w.depth = as_double(f.at("depth"), f.path("depth"));
  w.width = as_double(f.at("width"), f.path("width"));
  f.finish();
  return w;
}

void parse_landscape(const json& j, const std::string& path, ExperimentConfig& cfg) {
  Fields f(j, path);
  if (f.has("preset")) {
    const auto name = as_string(f.at("preset"), f.path("preset"));
    if (name == "landscape-A") {
      cfg.landscape = landscape_a();
    } else if (name == "landscape-B") {
      cfg.landscape = landscape_b();
    } else {
      throw ConfigError(f.path("preset"), "unknown landscape preset '" + name + "'");
    }
    cfg.landscape_name = name;
  } else {
    cfg.landscape_name = f.string("name", "custom");
    const json& wells = f.at("wells");
    if (!wells.is_array()) throw ConfigError(f.path("wells"), "expected an array of wells");
    cfg.landscape.wells.clear();
    for (std::size_t i = 0; i < wells.size(); ++i) {
      cfg.landscape.wells.push_back(parse_well(wells[i], child(f.path("wells"), i)));
    }
    cfg.landscape.base_level = f.number("base_level", 0.0);
  }
  f.finish();
  checked(path, [&] { cfg.landscape.validate(); });
}

void parse_dataset(const json& j, const std::string& path, DatasetBlock& ds) {
  Fields f(j, path);
  if (f.has("preset")) {
    const auto name = as_string(f.at("preset"), f.path("preset"));
    if (name != "blobs-4c") throw ConfigError(f.path("preset"), "unknown dataset preset '" + name + "'");
    ds.kind = "blobs";
    ds.blobs = blobs_4c();
  } else {
    ds.kind = f.string("kind", "blobs");
    if (ds.kind == "blobs") {
      ds.blobs.classes = static_cast<int>(f.integer("classes", ds.blobs.classes));
      ds.blobs.per_class = static_cast<int>(f.integer("per_class", ds.blobs.per_class));
      ds.blobs.spread = f.number("spread", ds.blobs.spread);
      const auto dim = f.integer("input_dim", static_cast<std::int64_t>(ds.blobs.input_dim));
      if (dim < 2) throw ConfigError(f.path("input_dim"), "must be >= 2");
      ds.blobs.input_dim = static_cast<std::size_t>(dim);
      if (ds.blobs.classes < 2) throw ConfigError(f.path("classes"), "must be >= 2");
      if (ds.blobs.per_class < 1) throw ConfigError(f.path("per_class"), "must be >= 1");
      if (!(ds.blobs.spread >= 0.0)) throw ConfigError(f.path("spread"), "must be >= 0");
    } else if (ds.kind == "idx") {
      ds.images_path = as_string(f.at("images"), f.path("images"));
      ds.labels_path = as_string(f.at("labels"), f.path("labels"));
    } else {
      throw ConfigError(f.path("kind"), "expected 'blobs' or 'idx'");
    }
  }
  ds.noise_rate = f.number("noise_rate", 0.0);
  if (!(ds.noise_rate >= 0.0 && ds.noise_rate < 1.0)) throw ConfigError(f.path("noise_rate"), "must lie in [0, 1)");
  f.finish();
}

void parse_model(const json& j, const std::string& path, ModelBlock& m) {
  Fields f(j, path);
  if (f.has("hidden")) {
    const json& arr = f.at("hidden");
    if (!arr.is_array()) throw ConfigError(f.path("hidden"), "expected an array of layer widths");
    m.hidden.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto w = as_int(arr[i], child(f.path("hidden"), i));
      if (w < 1) throw ConfigError(child(f.path("hidden"), i), "layer width must be >= 1");
      m.hidden.push_back(static_cast<std::size_t>(w));
    }
  }
  const auto act = f.string("activation", to_string(m.activation));
  if (act == "tanh") {
    m.activation = Activation::tanh;
  } else if (act == "relu") {
    m.activation = Activation::relu;
  } else {
    throw ConfigError(f.path("activation"), "expected 'tanh' or 'relu'");
  }
  f.finish();
}

void parse_training(const json& j, const std::string& path, TrainingBlock& t) {
  Fields f(j, path);
  const auto epochs = f.integer("epochs", t.epochs);
  const auto bs = f.integer("batch_size", static_cast<std::int64_t>(t.batch_size));
  if (epochs < 1 || epochs > 100000) throw ConfigError(f.path("epochs"), "must lie in [1, 100000]");
  if (bs < 1) throw ConfigError(f.path("batch_size"), "must be >= 1");
  t.epochs = static_cast<int>(epochs);
  t.batch_size = static_cast<std::size_t>(bs);
  f.finish();
}

void parse_trajectory(const json& j, const std::string& path, TrajectoryBlock& t) {
  Fields f(j, path);
  if (f.has("start")) t.start = as_vec2(f.at("start"), f.path("start"));
  t.total_steps = f.integer("total_steps", t.total_steps);
  if (t.total_steps < 0) throw ConfigError(f.path("total_steps"), "must be >= 0");
  f.finish();
}

void parse_grid(const json& j, const std::string& path, GridBlock& g) {
  Fields f(j, path);
  if (f.has("theta1")) {
    const auto r = as_vec2(f.at("theta1"), f.path("theta1"));
    g.region.lower[0] = r[0];
    g.region.upper[0] = r[1];
  }
  if (f.has("theta2")) {
    const auto r = as_vec2(f.at("theta2"), f.path("theta2"));
    g.region.lower[1] = r[0];
    g.region.upper[1] = r[1];
  }
  if (f.has("points")) {
    const json& p = f.at("points");
    if (!p.is_array() || p.size() != 2) throw ConfigError(f.path("points"), "expected [cols, rows]");
    const auto cols = as_int(p[0], child(f.path("points"), std::size_t{0}));
    const auto rows = as_int(p[1], child(f.path("points"), std::size_t{1}));
    if (cols < 1 || rows < 1) throw ConfigError(f.path("points"), "grid dimensions must be >= 1");
    g.cols = static_cast<std::size_t>(cols);
    g.rows = static_cast<std::size_t>(rows);
  }
  g.total_steps = f.integer("total_steps", g.total_steps);
  if (g.total_steps < 0) throw ConfigError(f.path("total_steps"), "must be >= 0");
  f.finish();
}

void parse_scenario(const json& j, const std::string& path, EscapeScenario& s) {
  Fields f(j, path);
  s.alpha = f.number("alpha", s.alpha);
  s.beta1 = f.number("beta1", s.beta1);
  s.batch_size = f.integer("batch_size", s.batch_size);
  s.delta_L = f.number("delta_L", s.delta_L);
  s.h_a_eigs = as_double_list(f.at("h_a_eigs"), f.path("h_a_eigs"));
  s.h_u_eigs = as_double_list(f.at("h_u_eigs"), f.path("h_u_eigs"));
  if (f.has("escape_index")) {
    const auto idx = f.integer("escape_index", 0);
    if (idx < 0) throw ConfigError(f.path("escape_index"), "must be >= 0");
    s.escape_index = static_cast<std::size_t>(idx);
  } else {
    const auto neg = std::find_if(s.h_u_eigs.begin(), s.h_u_eigs.end(), [](double x) { return x < 0.0; });
    s.escape_index = static_cast<std::size_t>(neg - s.h_u_eigs.begin());
  }
  s.rho = f.number("rho", s.rho);
  s.t_tilde = f.number("t_tilde", s.t_tilde);
  f.finish();
  checked(path, [&] { s.validate(); });
}

void parse_regret(const json& j, const std::string& path, RegretBlock& r) {
  Fields f(j, path);
  const auto dim = f.integer("dim", static_cast<std::int64_t>(r.dim));
  if (dim < 1) throw ConfigError(f.path("dim"), "must be >= 1");
  r.dim = static_cast<std::size_t>(dim);
  r.amplitude = f.number("amplitude", r.amplitude);
  if (!(r.amplitude >= 0.0)) throw ConfigError(f.path("amplitude"), "must be >= 0");
  r.options.horizon = f.integer("horizon", r.options.horizon);
  if (r.options.horizon < 1) throw ConfigError(f.path("horizon"), "must be >= 1");
  r.options.lr_decay_power = f.number("lr_decay_power", r.options.lr_decay_power);
  if (!(r.options.lr_decay_power >= 0.0)) throw ConfigError(f.path("lr_decay_power"), "must be >= 0");
  r.options.beta1_decay = f.number("beta1_decay", r.options.beta1_decay);
  if (!(r.options.beta1_decay > 0.0 && r.options.beta1_decay <= 1.0)) {
    throw ConfigError(f.path("beta1_decay"), "must lie in (0, 1]");
  }
  f.finish();
}

void parse_hessian(const json& j, const std::string& path, HessianBlock& h) {
  Fields f(j, path);
  h.max_iters = static_cast<int>(f.integer("max_iters", h.max_iters));
  h.tol = f.number("tol", h.tol);
  h.probes = static_cast<int>(f.integer("probes", h.probes));
  if (h.max_iters < 1) throw ConfigError(f.path("max_iters"), "must be >= 1");
  if (!(h.tol > 0.0)) throw ConfigError(f.path("tol"), "must be > 0");
  if (h.probes < 1) throw ConfigError(f.path("probes"), "must be >= 1");
  f.finish();
}

json schedule_json(const LrSchedule& s) {
  json j{{"kind", to_string(s.kind)}};
  if (s.kind == ScheduleKind::cosine_annealing) {
    j["total_steps"] = s.total_steps;
    j["eta_min"] = s.eta_min;
  } else if (s.kind == ScheduleKind::milestones) {
    j["milestones"] = s.milestones;
    j["gamma"] = s.gamma;
  }
  return j;
}

json adam_json(const AdamHyperParams& hp) {
  return {{"alpha", hp.alpha},
          {"beta1", hp.beta1},
          {"beta2", hp.beta2},
          {"epsilon", hp.epsilon},
          {"weight_decay", hp.weight_decay},
          {"epsilon_placement",
           hp.epsilon_placement == EpsilonPlacement::outside_sqrt ? "outside_sqrt" : "inside_sqrt"}};
}

json optimizer_json(const OptimizerBlock& b) {
  json j{{"name", b.config.kind_name()}, {"label", b.config.label}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SgdParams>) {
          j["alpha"] = p.alpha;
        } else if constexpr (std::is_same_v<T, SgdmParams>) {
          j["alpha"] = p.alpha;
          j["beta"] = p.beta;
        } else if constexpr (std::is_same_v<T, AdamHyperParams>) {
          j.update(adam_json(p));
        } else {
          j.update(adam_json(p.adam));
          j["order_n"] = p.order_n;
          j["kappa"] = p.kappa;
          if (b.switch_epochs) {
            j["switch_epochs"] = *b.switch_epochs;
          } else {
            j["switch_step"] = p.switch_step;
          }
          switch (b.pre_switch_mode) {
            case PreSwitchLr::alpha_pow_n: j["pre_switch_lr"] = "alpha_pow_n"; break;
            case PreSwitchLr::gain_matched: j["pre_switch_lr"] = "gain_matched"; break;
            case PreSwitchLr::fixed: j["pre_switch_lr"] = *p.pre_switch_lr_override; break;
          }
        }
      },
      b.config.params);
  return j;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::trajectory: return "trajectory";
    case ExperimentKind::grid_flatness: return "grid-flatness";
    case ExperimentKind::train: return "train";
    case ExperimentKind::escape_theory: return "escape-theory";
    case ExperimentKind::regret: return "regret";
    case ExperimentKind::hessian_report: return "hessian-report";
  }
  return "trajectory";
}

OptimizerConfig resolve_optimizer(const OptimizerBlock& block, std::int64_t steps_per_epoch) {
  OptimizerConfig cfg = block.config;
  if (auto* p = std::get_if<MIAdamHyperParams>(&cfg.params)) {
    switch (block.pre_switch_mode) {
      case PreSwitchLr::alpha_pow_n:
        p->pre_switch_lr_override.reset();
        break;
      case PreSwitchLr::gain_matched:
        p->pre_switch_lr_override = p->adam.alpha * std::pow(1.0 - p->kappa, p->order_n - 1);
        break;
      case PreSwitchLr::fixed:
        break;
    }
    if (block.switch_epochs) p->switch_step = *block.switch_epochs * steps_per_epoch;
  }
  return cfg;
}

ExperimentConfig parse_config(const json& j) {
  Fields f(j, "");
  ExperimentConfig cfg;
  cfg.kind = parse_kind(as_string(f.at("kind"), "/kind"), "/kind");
  cfg.seed = f.has("seed") ? as_uint64(f.at("seed"), "/seed") : 0;
  cfg.output_dir = f.string("output_dir", "out/" + std::string(to_string(cfg.kind)));
  if (cfg.output_dir.empty()) throw ConfigError("/output_dir", "must be non-empty");

  const bool landscape_kind = cfg.kind == ExperimentKind::trajectory || cfg.kind == ExperimentKind::grid_flatness;
  const bool model_kind = trains_models(cfg.kind);

  if (landscape_kind) {
    if (cfg.kind == ExperimentKind::trajectory) {
      if (f.has("trajectory")) parse_trajectory(f.at("trajectory"), "/trajectory", cfg.trajectory);
    } else if (f.has("grid")) {
      parse_grid(f.at("grid"), "/grid", cfg.grid);
    }
    const std::int64_t steps =
        cfg.kind == ExperimentKind::trajectory ? cfg.trajectory.total_steps : cfg.grid.total_steps;
    parse_landscape(f.at("landscape"), "/landscape", cfg);
    cfg.schedule = f.has("schedule") ? parse_schedule(f.at("schedule"), "/schedule")
                                     : LrSchedule::cosine(std::max<std::int64_t>(1, steps));
    if (cfg.schedule.kind == ScheduleKind::cosine_annealing && cfg.schedule.total_steps < steps) {
      throw ConfigError("/schedule/total_steps", "cosine horizon is shorter than the run");
    }
  }
  if (model_kind) {
    parse_dataset(f.at("dataset"), "/dataset", cfg.dataset);
    if (f.has("model")) parse_model(f.at("model"), "/model", cfg.model);
    if (f.has("training")) parse_training(f.at("training"), "/training", cfg.training);
    if (cfg.kind == ExperimentKind::hessian_report && f.has("hessian")) {
      parse_hessian(f.at("hessian"), "/hessian", cfg.hessian);
    }
    cfg.schedule = f.has("schedule") ? parse_schedule(f.at("schedule"), "/schedule")
                                     : LrSchedule::step_decay({50, 75}, 0.1);
    if (cfg.schedule.kind == ScheduleKind::cosine_annealing && cfg.schedule.total_steps < cfg.training.epochs) {
      throw ConfigError("/schedule/total_steps", "cosine horizon is shorter than the number of epochs");
    }
  }
  if (cfg.kind == ExperimentKind::escape_theory) {
    parse_scenario(f.at("scenario"), "/scenario", cfg.scenario);
  }
  if (cfg.kind == ExperimentKind::regret) {
    if (f.has("regret")) parse_regret(f.at("regret"), "/regret", cfg.regret);
  }
  if (cfg.kind != ExperimentKind::escape_theory) {
    const json& opts = f.at("optimizers");
    if (!opts.is_array() || opts.empty()) throw ConfigError("/optimizers", "expected a non-empty array");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < opts.size(); ++i) {
      const auto path = child("/optimizers", i);
      cfg.optimizers.push_back(parse_optimizer(opts[i], path, cfg.kind));
      if (!labels.insert(cfg.optimizers.back().config.label).second) {
        throw ConfigError(path + "/label", "duplicate label '" + cfg.optimizers.back().config.label + "'");
      }
    }
  }
  f.finish();
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& cfg) {
  json j{{"kind", to_string(cfg.kind)}, {"seed", cfg.seed}, {"output_dir", cfg.output_dir}};
  if (cfg.kind != ExperimentKind::escape_theory) {
    json opts = json::array();
    for (const auto& o : cfg.optimizers) opts.push_back(optimizer_json(o));
    j["optimizers"] = opts;
  }
  switch (cfg.kind) {
    case ExperimentKind::trajectory:
    case ExperimentKind::grid_flatness: {
      json wells = json::array();
      for (const auto& w : cfg.landscape.wells) {
        wells.push_back({{"center", w.center}, {"depth", w.depth}, {"width", w.width}});
      }
      j["landscape"] = {{"name", cfg.landscape_name}, {"wells", wells}, {"base_level", cfg.landscape.base_level}};
      j["schedule"] = schedule_json(cfg.schedule);
      if (cfg.kind == ExperimentKind::trajectory) {
        j["trajectory"] = {{"start", cfg.trajectory.start}, {"total_steps", cfg.trajectory.total_steps}};
      } else {
        j["grid"] = {{"theta1", {cfg.grid.region.lower[0], cfg.grid.region.upper[0]}},
                     {"theta2", {cfg.grid.region.lower[1], cfg.grid.region.upper[1]}},
                     {"points", {cfg.grid.cols, cfg.grid.rows}},
                     {"total_steps", cfg.grid.total_steps}};
      }
      break;
    }
    case ExperimentKind::train:
    case ExperimentKind::hessian_report: {
      const auto& ds = cfg.dataset;
      if (ds.kind == "blobs") {
        j["dataset"] = {{"kind", "blobs"},
                        {"classes", ds.blobs.classes},
                        {"per_class", ds.blobs.per_class},
                        {"spread", ds.blobs.spread},
                        {"input_dim", ds.blobs.input_dim},
                        {"noise_rate", ds.noise_rate}};
      } else {
        j["dataset"] = {{"kind", "idx"},
                        {"images", ds.images_path},
                        {"labels", ds.labels_path},
                        {"noise_rate", ds.noise_rate}};
      }
      j["model"] = {{"hidden", cfg.model.hidden}, {"activation", to_string(cfg.model.activation)}};
      j["training"] = {{"epochs", cfg.training.epochs}, {"batch_size", cfg.training.batch_size}};
      j["schedule"] = schedule_json(cfg.schedule);
      if (cfg.kind == ExperimentKind::hessian_report) {
        j["hessian"] = {{"max_iters", cfg.hessian.max_iters}, {"tol", cfg.hessian.tol}, {"probes", cfg.hessian.probes}};
      }
      break;
    }
    case ExperimentKind::escape_theory: {
      const auto& s = cfg.scenario;
      j["scenario"] = {{"alpha", s.alpha},       {"beta1", s.beta1},         {"batch_size", s.batch_size},
                       {"delta_L", s.delta_L},   {"h_a_eigs", s.h_a_eigs},   {"h_u_eigs", s.h_u_eigs},
                       {"escape_index", s.escape_index}, {"rho", s.rho},     {"t_tilde", s.t_tilde}};
      break;
    }
    case ExperimentKind::regret: {
      const auto& r = cfg.regret;
      j["regret"] = {{"dim", r.dim},
                     {"amplitude", r.amplitude},
                     {"horizon", r.options.horizon},
                     {"lr_decay_power", r.options.lr_decay_power},
                     {"beta1_decay", r.options.beta1_decay}};
      break;
    }
  }
  return j;
}

}  // namespace flatmin
