#include "flatmin/presets.hpp"

namespace flatmin {

LandscapeSpec landscape_a() {
  LandscapeSpec s;
  s.wells = {
      {{0.2, 0.1}, 1.0, 1.0},     // flat minimum
      {{-1.8, 0.5}, 2.0, 0.3},    // sharp
      {{1.8, -0.4}, 1.8, 0.33},   // sharp
      {{0.0, 0.0}, 1.0, 4.0},     // basin
  };
  return s;
}

LandscapeSpec landscape_b() {
  LandscapeSpec s;
  s.wells = {
      {{0.1, -1.2}, 1.0, 0.7},   {{1.3, -1.3}, 1.5, 0.25}, {{-1.35, 0.1}, 1.0, 0.7},
      {{1.4, 0.0}, 1.0, 0.7},    {{2.9, 0.2}, 1.5, 0.25},  {{-1.5, 1.75}, 1.5, 0.25},
      {{-0.15, 1.65}, 1.0, 0.7}, {{2.75, 1.45}, 1.0, 0.7}, {{0.1, 2.9}, 1.5, 0.25},
      {{1.45, 3.0}, 1.0, 0.7},
      {{0.5, 0.5}, 1.0, 4.0},  // basin
  };
  return s;
}

BlobsParams blobs_4c() { return {}; }

AdamHyperParams adam_default() {
  AdamHyperParams hp;
  hp.alpha = 1e-3;
  hp.beta1 = 0.9;
  hp.beta2 = 0.999;
  hp.epsilon = 1e-8;
  hp.weight_decay = 5e-5;
  return hp;
}

MIAdamHyperParams miadam_default() {
  MIAdamHyperParams hp;
  hp.adam = adam_default();
  hp.order_n = 1;
  hp.kappa = 0.98;
  hp.switch_step = kMiadamDefaultSwitchEpochs;  // epochs until converted
  return hp;
}

MIAdamHyperParams miadam_simulation() {
  MIAdamHyperParams hp;
  hp.adam = adam_default();
  hp.order_n = 1;
  hp.kappa = 0.885;
  hp.switch_step = 1400;
  return hp;
}

const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"landscape-A", PresetKind::landscape,
       "flat Gaussian well between two narrow, deeper wells inside a broad basin"},
      {"landscape-B", PresetKind::landscape,
       "ten wells alternating wide/shallow and narrow/deep over [-2,3]^2 inside a broad basin"},
      {"blobs-4c", PresetKind::dataset,
       "4 Gaussian classes, 500 samples each, 20 inputs, centers on a radius-3 circle, spread 1"},
      {"adam-default", PresetKind::optimizer,
       "Adam: alpha 1e-3, beta1 0.9, beta2 0.999, eps 1e-8, weight_decay 5e-5"},
      {"miadam-default", PresetKind::optimizer,
       "MIAdam1: adam-default plus kappa 0.98, switch after 20 epochs"},
      {"miadam-label-noise", PresetKind::optimizer,
       "MIAdam1: adam-default plus kappa 0.98, switch after 40 epochs"},
      {"miadam-simulation", PresetKind::optimizer,
       "MIAdam1 for landscapes: adam-default plus kappa 0.885, switch at step 1400"},
  };
  return catalog;
}

const char* to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::landscape: return "landscape";
    case PresetKind::dataset: return "dataset";
    case PresetKind::optimizer: return "optimizer";
  }
  return "landscape";
}

}  // namespace flatmin
