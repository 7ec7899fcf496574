#pragma once

#include <string>
#include <vector>

#include "flatmin/landscape.hpp"
#include "flatmin/optim.hpp"

namespace flatmin {

/// One flat well between two narrow, deeper wells, inside a broad basin.
LandscapeSpec landscape_a();

/// Ten wells alternating between wide/shallow and narrow/deep over
/// [-2, 3]^2, inside a broad basin.
LandscapeSpec landscape_b();

/// Blob dataset parameters for the "blobs-4c" preset.
struct BlobsParams {
  int classes = 4;
  int per_class = 500;
  double spread = 1.0;
  std::size_t input_dim = 20;
};
BlobsParams blobs_4c();

/// Adam defaults for classifier training: alpha 1e-3, betas (0.9, 0.999),
/// eps 1e-8, weight decay 5e-5.
AdamHyperParams adam_default();

/// MIAdam for classifier training: adam_default() plus kappa 0.98. The switch
/// is given in epochs (see miadam_default_switch_epochs) and converted by the
/// harness.
MIAdamHyperParams miadam_default();
inline constexpr int kMiadamDefaultSwitchEpochs = 20;
inline constexpr int kMiadamLabelNoiseSwitchEpochs = 40;

/// MIAdam for landscape simulations: adam_default() plus kappa 0.885 and a
/// switch at step 1400 of 1500.
MIAdamHyperParams miadam_simulation();
inline constexpr std::int64_t kSimulationSteps = 1500;

enum class PresetKind { landscape, dataset, optimizer };

struct PresetInfo {
  std::string name;
  PresetKind kind;
  std::string description;
};

/// Every preset name accepted in configs, in a stable order.
const std::vector<PresetInfo>& preset_catalog();

const char* to_string(PresetKind kind);

}  // namespace flatmin
