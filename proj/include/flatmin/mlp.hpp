#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flatmin/optim.hpp"

namespace flatmin {

enum class Activation { tanh, relu };

const char* to_string(Activation a);

struct MlpSpec {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output (= classes)
  Activation activation = Activation::tanh;
  std::uint64_t init_seed = 0;
  /// Only "glorot_uniform" is implemented: W ~ U(+-sqrt(6 / (fan_in + fan_out))), b = 0.
  std::string init_scale_rule = "glorot_uniform";

  void validate() const;
  std::size_t parameter_count() const;
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t num_classes() const { return layer_sizes.back(); }
};

/// A minibatch: row-major inputs (size() x input_dim) and class labels.
struct Batch {
  std::vector<double> inputs;
  std::vector<int> labels;
  std::size_t input_dim = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {inputs.data() + i * input_dim, input_dim};
  }
};

/// Fully connected classifier with a flat parameter vector.
///
/// Canonical parameter order is layer-major; within a layer the weight matrix
/// (out x in, row-major) comes first, then the bias vector.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, ParamVector params);

  /// Glorot-uniform weights drawn from spec.init_seed, zero biases.
  static Mlp initialize(const MlpSpec& spec);

  const MlpSpec& spec() const noexcept { return spec_; }
  const ParamVector& params() const noexcept { return params_; }
  ParamVector& params() noexcept { return params_; }

  std::size_t num_layers() const noexcept { return spec_.layer_sizes.size() - 1; }
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const;

 private:
  MlpSpec spec_;
  ParamVector params_;
  std::vector<std::size_t> offsets_;
};

struct ForwardResult {
  double loss = 0.0;
  std::vector<double> logits;  // batch x classes, row-major
};

/// Mean cross-entropy over the batch (log-sum-exp stabilized).
ForwardResult forward_loss(const Mlp& model, const Batch& batch);

/// Exact gradient of forward_loss in canonical parameter order.
ParamVector backward(const Mlp& model, const Batch& batch);

/// Loss and gradient from a single forward/backward sweep.
std::pair<double, ParamVector> loss_and_gradient(const Mlp& model, const Batch& batch);

/// Argmax over each row of logits; ties go to the lowest class index.
std::vector<int> predict_classes(std::span<const double> logits, std::size_t classes);

double accuracy(std::span<const double> logits, std::span<const int> labels, std::size_t classes);

}  // namespace flatmin
