#include <cstdlib>
#include <exception>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "flatmin/config.hpp"
#include "flatmin/errors.hpp"
#include "flatmin/harness.hpp"
#include "flatmin/presets.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

nlohmann::json optimizer_values(const flatmin::OptimizerConfig& c) {
  nlohmann::json j{{"name", c.kind_name()}};
  if (const auto* a = std::get_if<flatmin::AdamHyperParams>(&c.params)) {
    j.update({{"alpha", a->alpha}, {"beta1", a->beta1}, {"beta2", a->beta2},
              {"epsilon", a->epsilon}, {"weight_decay", a->weight_decay}});
  } else if (const auto* m = std::get_if<flatmin::MIAdamHyperParams>(&c.params)) {
    j.update({{"alpha", m->adam.alpha}, {"beta1", m->adam.beta1}, {"beta2", m->adam.beta2},
              {"epsilon", m->adam.epsilon}, {"weight_decay", m->adam.weight_decay},
              {"order_n", m->order_n}, {"kappa", m->kappa}});
  }
  return j;
}

nlohmann::json preset_values(const std::string& name) {
  using namespace flatmin;
  auto wells = [](const LandscapeSpec& s) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& w : s.wells) arr.push_back({{"center", w.center}, {"depth", w.depth}, {"width", w.width}});
    return nlohmann::json{{"wells", arr}, {"base_level", s.base_level}};
  };
  if (name == "landscape-A") return wells(landscape_a());
  if (name == "landscape-B") return wells(landscape_b());
  if (name == "blobs-4c") {
    const auto b = blobs_4c();
    return {{"classes", b.classes}, {"per_class", b.per_class}, {"spread", b.spread}, {"input_dim", b.input_dim}};
  }
  OptimizerConfig c;
  nlohmann::json extra;
  if (name == "adam-default") {
    c.params = adam_default();
  } else if (name == "miadam-default") {
    c.params = miadam_default();
    extra["switch_epochs"] = kMiadamDefaultSwitchEpochs;
  } else if (name == "miadam-label-noise") {
    c.params = miadam_default();
    extra["switch_epochs"] = kMiadamLabelNoiseSwitchEpochs;
  } else {
    c.params = miadam_simulation();
    extra["switch_step"] = std::get<MIAdamHyperParams>(c.params).switch_step;
  }
  auto j = optimizer_values(c);
  if (!extra.is_null()) j.update(extra);
  return j;
}

int cmd_run(const std::string& config_path, const std::string& output_dir) {
  try {
    auto cfg = flatmin::load_config_file(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    for (const auto& w : flatmin::config_warnings(cfg)) std::cerr << "warning: " << w << '\n';
    const auto out = flatmin::execute(cfg);
    flatmin::write_outputs(out, cfg.output_dir);
    std::cout << "wrote " << out.files.size() + 1 << " files to " << cfg.output_dir << '\n';
    return 0;
  } catch (const flatmin::ConfigError& e) {
    std::cerr << "config error";
    if (!e.field().empty()) std::cerr << " at " << e.field();
    std::cerr << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const flatmin::NonFiniteState& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const flatmin::NonFiniteInput& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

int cmd_presets(bool as_json) {
  const auto& catalog = flatmin::preset_catalog();
  if (as_json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : catalog) {
      arr.push_back({{"name", p.name},
                     {"kind", flatmin::to_string(p.kind)},
                     {"description", p.description},
                     {"values", preset_values(p.name)}});
    }
    std::cout << arr.dump(2) << '\n';
    return 0;
  }
  for (const auto& p : catalog) {
    std::cout << std::left << std::setw(20) << p.name << std::setw(11) << flatmin::to_string(p.kind)
              << p.description << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flatmin: MIAdam and flat-minima experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run an experiment from a config (or a previous report.json)");
  run->add_option("config", config_path, "Path to the JSON config")->required();
  run->add_option("-o,--output-dir", output_dir, "Override output_dir from the config");

  bool as_json = false;
  auto* presets = app.add_subcommand("presets", "List built-in presets");
  presets->add_flag("--json", as_json, "Emit JSON with preset values");

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*run) return cmd_run(config_path, output_dir);
  if (*presets) return cmd_presets(as_json);
  if (*version) {
    std::cout << "flatmin " << flatmin::kArtifactVersion << '\n';
    return 0;
  }
  return EXIT_FAILURE;
}
