#include "flatmin/train.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "flatmin/errors.hpp"

namespace flatmin {

std::int64_t batches_per_epoch(std::size_t n_train, std::size_t batch_size) {
  if (batch_size == 0) throw ContractViolation("batch_size must be >= 1");
  return static_cast<std::int64_t>((n_train + batch_size - 1) / batch_size);
}

std::int64_t epochs_to_steps(std::int64_t epochs, std::size_t n_train, std::size_t batch_size) {
  return epochs * batches_per_epoch(n_train, batch_size);
}

TrainResult train_classifier(const MlpSpec& spec, const Dataset& data, const OptimizerConfig& optimizer,
                             const LrSchedule& sched, int epochs, std::size_t batch_size,
                             std::uint64_t seed) {
  if (epochs < 1) throw ContractViolation("epochs must be >= 1");
  if (batch_size == 0) throw ContractViolation("batch_size must be >= 1");
  if (data.train_idx.empty()) throw ContractViolation("dataset has no training samples");
  if (spec.input_dim() != data.input_dim) throw ContractViolation("model input size does not match dataset");
  if (static_cast<int>(spec.num_classes()) != data.num_classes) {
    throw ContractViolation("model output size does not match dataset classes");
  }
  sched.validate();

  TrainResult result{Mlp::initialize(spec), {}, 0};
  Optimizer opt(optimizer);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order = data.train_idx;
  const Batch train_all = data.train_batch();
  const Batch test_all = data.test_batch();
  const std::size_t classes = spec.num_classes();

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr_mult = schedule_multiplier(sched, epoch - 1);
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const Batch batch = data.gather(std::span(order).subspan(start, end - start));
      try {
        auto [loss, grad] = loss_and_gradient(result.model, batch);
        opt.step(result.model.params(), grad, lr_mult);
        ++result.total_steps;
      } catch (const NonFiniteState& e) {
        throw NonFiniteState(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(batch_index),
                             result.total_steps + 1);
      }
    }
    EpochMetrics m;
    m.epoch = epoch;
    auto train_eval = forward_loss(result.model, train_all);
    m.train_loss = train_eval.loss;
    m.train_acc = accuracy(train_eval.logits, train_all.labels, classes);
    if (test_all.size() > 0) {
      auto test_eval = forward_loss(result.model, test_all);
      m.test_loss = test_eval.loss;
      m.test_acc = accuracy(test_eval.logits, test_all.labels, classes);
    }
    result.metrics.push_back(m);
  }
  return result;
}

}  // namespace flatmin
