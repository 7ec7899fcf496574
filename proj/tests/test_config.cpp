#include <string>

#include "doctest.h"
#include "json.hpp"

#include "flatmin/config.hpp"
#include "flatmin/errors.hpp"
#include "flatmin/harness.hpp"

using namespace flatmin;
using nlohmann::json;

namespace {

json trajectory_cfg() {
  return json::parse(R"({
    "kind": "trajectory", "seed": 3,
    "landscape": {"preset": "landscape-A"},
    "optimizers": [{"preset": "adam-default", "label": "adam", "alpha": 0.1},
                   {"preset": "miadam-simulation", "label": "mi", "alpha": 0.1}]
  })");
}

std::string error_field(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("presets expand to documented values") {
    const auto cfg = parse_config(trajectory_cfg());
    CHECK(cfg.kind == ExperimentKind::trajectory);
    CHECK(cfg.landscape_name == "landscape-A");
    REQUIRE(cfg.optimizers.size() == 2);
    const auto& adam = std::get<AdamHyperParams>(cfg.optimizers[0].config.params);
    CHECK(adam.alpha == 0.1);
    CHECK(adam.beta1 == 0.9);
    CHECK(adam.beta2 == 0.999);
    CHECK(adam.epsilon == 1e-8);
    CHECK(adam.weight_decay == 5e-5);
    const auto& mi = std::get<MIAdamHyperParams>(cfg.optimizers[1].config.params);
    CHECK(mi.kappa == 0.885);
    CHECK(mi.switch_step == 1400);
    CHECK(cfg.schedule.kind == ScheduleKind::cosine_annealing);
    CHECK(cfg.schedule.total_steps == 1500);
    CHECK(cfg.trajectory.total_steps == 1500);
  }

  TEST_CASE("round trip through to_json") {
    for (const char* text : {
             R"({"kind":"trajectory","seed":3,"landscape":{"preset":"landscape-B"},"optimizers":[{"name":"sgdm","alpha":0.01,"beta":0.5}]})",
             R"({"kind":"grid-flatness","grid":{"points":[4,3]},"landscape":{"wells":[{"center":[0,0],"depth":1,"width":1}]},"optimizers":[{"name":"miadam","order_n":2,"pre_switch_lr":"gain_matched"}]})",
             R"({"kind":"train","dataset":{"preset":"blobs-4c","noise_rate":0.2},"optimizers":[{"preset":"miadam-label-noise"},{"name":"miadam","label":"m2","pre_switch_lr":0.003,"switch_step":9}]})",
             R"({"kind":"escape-theory","scenario":{"h_a_eigs":[10,2],"h_u_eigs":[2,-5]}})",
             R"({"kind":"regret","regret":{"horizon":50},"optimizers":[{"name":"adam","epsilon_placement":"inside_sqrt"}]})",
             R"({"kind":"hessian-report","dataset":{"kind":"idx","images":"a","labels":"b"},"optimizers":[{"name":"sgd"}]})"}) {
      CAPTURE(text);
      const auto cfg = parse_config_text(text);
      const auto j1 = to_json(cfg);
      const auto j2 = to_json(parse_config(j1));
      CHECK(j1 == j2);
    }
  }

  TEST_CASE("escape index defaults to the negative eigenvalue") {
    const auto cfg = parse_config_text(R"({"kind":"escape-theory","scenario":{"h_a_eigs":[10,2],"h_u_eigs":[2,-5]}})");
    CHECK(cfg.scenario.escape_index == 1);
  }

  TEST_CASE("unknown and misplaced fields are rejected with a path") {
    auto j = trajectory_cfg();
    j["optimizers"][1]["kapa"] = 0.9;
    CHECK(error_field(j) == "/optimizers/1/kapa");

    j = trajectory_cfg();
    j["bogus"] = 1;
    CHECK(error_field(j) == "/bogus");

    j = trajectory_cfg();
    j["dataset"] = json::object();
    CHECK(error_field(j) == "/dataset");

    j = trajectory_cfg();
    j["optimizers"][0]["kappa"] = 0.9;
    CHECK(error_field(j) == "/optimizers/0/kappa");

    j = trajectory_cfg();
    j["landscape"]["wells"] = json::array();
    CHECK(error_field(j) == "/landscape/wells");
  }

  TEST_CASE("type and range errors") {
    auto j = trajectory_cfg();
    j["seed"] = "x";
    CHECK(error_field(j) == "/seed");

    j = trajectory_cfg();
    j["optimizers"][0]["alpha"] = -1.0;
    CHECK(error_field(j) == "/optimizers/0");

    j = trajectory_cfg();
    j["optimizers"][1]["label"] = "adam";
    CHECK(error_field(j) == "/optimizers/1/label");

    j = trajectory_cfg();
    j["optimizers"][1]["label"] = "a/b";
    CHECK(error_field(j) == "/optimizers/1/label");

    j = trajectory_cfg();
    j["schedule"] = {{"kind", "cosine_annealing"}, {"total_steps", 100}};
    CHECK(error_field(j) == "/schedule/total_steps");

    j = trajectory_cfg();
    j["optimizers"][1]["switch_epochs"] = 3;
    CHECK(error_field(j) == "/optimizers/1");

    j = trajectory_cfg();
    j.erase("landscape");
    CHECK(error_field(j) == "/landscape");

    j = trajectory_cfg();
    j["kind"] = "nope";
    CHECK(error_field(j) == "/kind");
  }

  TEST_CASE("syntax errors carry line and column") {
    try {
      parse_config_text("{\n  \"kind\": \"trajectory\",\n  oops\n}");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 3") != std::string::npos);
      CHECK(msg.find("column") != std::string::npos);
    }
  }

  TEST_CASE("pre-switch resolution and epoch conversion") {
    OptimizerBlock b;
    MIAdamHyperParams mi;
    mi.adam.alpha = 0.01;
    mi.kappa = 0.9;
    mi.order_n = 3;
    b.config = {"m", mi};
    b.pre_switch_mode = PreSwitchLr::gain_matched;
    b.switch_epochs = 40;
    const auto r = resolve_optimizer(b, 13);
    const auto& p = std::get<MIAdamHyperParams>(r.params);
    CHECK(p.pre_switch_lr() == doctest::Approx(0.01 * 0.01));
    CHECK(p.switch_step == 520);

    b.pre_switch_mode = PreSwitchLr::alpha_pow_n;
    CHECK(std::get<MIAdamHyperParams>(resolve_optimizer(b).params).pre_switch_lr() == doctest::Approx(1e-6));
  }

  TEST_CASE("warnings flag overrides and untested orders") {
    auto cfg = parse_config_text(
        R"({"kind":"regret","optimizers":[{"name":"miadam","label":"a","order_n":2},{"name":"miadam","label":"b","order_n":5,"pre_switch_lr":0.01}]})");
    const auto w = config_warnings(cfg);
    REQUIRE(w.size() == 3);
    CHECK(w[0].find("alpha^n") != std::string::npos);
    CHECK(w[2].find("untested") != std::string::npos);
  }

  TEST_CASE("train kinds convert switch epochs") {
    const auto cfg = parse_config_text(
        R"({"kind":"train","dataset":{"preset":"blobs-4c"},"optimizers":[{"preset":"miadam-default"}]})");
    REQUIRE(cfg.optimizers[0].switch_epochs.has_value());
    CHECK(*cfg.optimizers[0].switch_epochs == 20);
    CHECK(cfg.schedule.kind == ScheduleKind::milestones);
    CHECK(cfg.schedule.milestones == std::vector<std::int64_t>{50, 75});
    CHECK(cfg.training.epochs == 150);
  }
}
