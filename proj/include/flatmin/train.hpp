#pragma once

#include <cstdint>
#include <vector>

#include "flatmin/dataset.hpp"
#include "flatmin/mlp.hpp"
#include "flatmin/optim.hpp"
#include "flatmin/schedule.hpp"

namespace flatmin {

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
};

struct TrainResult {
  Mlp model;
  std::vector<EpochMetrics> metrics;
  std::int64_t total_steps = 0;
};

/// ceil(n_train / batch_size)
std::int64_t batches_per_epoch(std::size_t n_train, std::size_t batch_size);

/// Converts an epoch count into optimizer steps for a given split and batch size.
std::int64_t epochs_to_steps(std::int64_t epochs, std::size_t n_train, std::size_t batch_size);

/// Minibatch training with a fresh seeded shuffle each epoch. The schedule is
/// sampled once per epoch at index epoch - 1. Metrics are taken after every
/// epoch on the full train split (its possibly noisy labels) and the test split.
TrainResult train_classifier(const MlpSpec& spec, const Dataset& data, const OptimizerConfig& optimizer,
                             const LrSchedule& sched, int epochs, std::size_t batch_size,
                             std::uint64_t seed);

}  // namespace flatmin
