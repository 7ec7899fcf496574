#include "flatmin/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "flatmin/errors.hpp"

namespace flatmin {

namespace {

double activate(Activation a, double z) { return a == Activation::tanh ? std::tanh(z) : std::max(0.0, z); }

// Derivative expressed through the pre-activation z and the output y.
double activate_grad(Activation a, double z, double y) {
  return a == Activation::tanh ? 1.0 - y * y : (z > 0.0 ? 1.0 : 0.0);
}

void check_batch(const Mlp& model, const Batch& batch) {
  if (batch.size() == 0) throw ContractViolation("batch must be non-empty");
  if (batch.input_dim != model.spec().input_dim()) {
    throw ContractViolation("batch input_dim " + std::to_string(batch.input_dim) +
                            " does not match model input " + std::to_string(model.spec().input_dim()));
  }
  if (batch.inputs.size() != batch.size() * batch.input_dim) {
    throw ContractViolation("batch inputs size does not match labels x input_dim");
  }
  const int classes = static_cast<int>(model.spec().num_classes());
  for (int y : batch.labels) {
    if (y < 0 || y >= classes) throw ContractViolation("label " + std::to_string(y) + " out of range");
  }
}

// One sweep over the batch. Fills logits when requested and accumulates the
// mean gradient when `grad` is non-null. Returns the mean loss.
double sweep(const Mlp& model, const Batch& batch, std::vector<double>* logits, ParamVector* grad) {
  check_batch(model, batch);
  const auto& sizes = model.spec().layer_sizes;
  const std::size_t layers = model.num_layers();
  const std::size_t classes = sizes.back();
  const Activation act = model.spec().activation;
  const ParamVector& p = model.params();
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  // pre[l] / out[l]: pre-activation and output of layer l (out[0] is the input).
  std::vector<std::vector<double>> pre(layers + 1), out(layers + 1);
  for (std::size_t l = 0; l <= layers; ++l) {
    pre[l].resize(sizes[l]);
    out[l].resize(sizes[l]);
  }
  std::vector<double> delta, delta_prev;
  if (logits) logits->assign(batch.size() * classes, 0.0);
  if (grad) grad->assign(p.size(), 0.0);

  double total = 0.0;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto x = batch.row(n);
    std::copy(x.begin(), x.end(), out[0].begin());
    for (std::size_t l = 1; l <= layers; ++l) {
      const std::size_t in = sizes[l - 1];
      const double* w = p.data() + model.weight_offset(l - 1);
      const double* b = p.data() + model.bias_offset(l - 1);
      for (std::size_t j = 0; j < sizes[l]; ++j) {
        double z = b[j];
        for (std::size_t k = 0; k < in; ++k) z += w[j * in + k] * out[l - 1][k];
        pre[l][j] = z;
        out[l][j] = l == layers ? z : activate(act, z);
        if (!std::isfinite(out[l][j])) {
          throw NonFiniteState("non-finite activation in layer " + std::to_string(l));
        }
      }
    }

    const auto& z = out[layers];
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    const int y = batch.labels[n];
    total += lse - z[static_cast<std::size_t>(y)];
    if (logits) std::copy(z.begin(), z.end(), logits->begin() + static_cast<std::ptrdiff_t>(n * classes));
    if (!grad) continue;

    // d(mean CE)/d logits = (softmax - onehot) / N
    delta.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      delta[c] = (std::exp(z[c] - lse) - (static_cast<int>(c) == y ? 1.0 : 0.0)) * inv_n;
    }
    for (std::size_t l = layers; l >= 1; --l) {
      const std::size_t in = sizes[l - 1];
      const double* w = p.data() + model.weight_offset(l - 1);
      double* gw = grad->data() + model.weight_offset(l - 1);
      double* gb = grad->data() + model.bias_offset(l - 1);
      for (std::size_t j = 0; j < sizes[l]; ++j) {
        gb[j] += delta[j];
        for (std::size_t k = 0; k < in; ++k) gw[j * in + k] += delta[j] * out[l - 1][k];
      }
      if (l == 1) break;
      delta_prev.assign(in, 0.0);
      for (std::size_t j = 0; j < sizes[l]; ++j) {
        for (std::size_t k = 0; k < in; ++k) delta_prev[k] += w[j * in + k] * delta[j];
      }
      for (std::size_t k = 0; k < in; ++k) {
        delta_prev[k] *= activate_grad(act, pre[l - 1][k], out[l - 1][k]);
      }
      delta.swap(delta_prev);
    }
  }
  const double loss = total * inv_n;
  if (!std::isfinite(loss)) throw NonFiniteState("non-finite loss");
  return loss;
}

}  // namespace

const char* to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw ContractViolation("an MLP needs at least input and output layers");
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw ContractViolation("layer sizes must be positive");
  }
  if (layer_sizes.back() < 2) throw ContractViolation("output layer needs >= 2 classes");
  if (init_scale_rule != "glorot_uniform") {
    throw ContractViolation("unknown init_scale_rule '" + init_scale_rule + "'");
  }
}

std::size_t MlpSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l) n += layer_sizes[l] * (layer_sizes[l - 1] + 1);
  return n;
}

Mlp::Mlp(MlpSpec spec, ParamVector params) : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  if (params_.size() != spec_.parameter_count()) {
    throw ContractViolation("parameter vector has " + std::to_string(params_.size()) +
                            " entries, spec needs " + std::to_string(spec_.parameter_count()));
  }
  std::size_t off = 0;
  for (std::size_t l = 1; l < spec_.layer_sizes.size(); ++l) {
    offsets_.push_back(off);
    off += spec_.layer_sizes[l] * (spec_.layer_sizes[l - 1] + 1);
  }
}

std::size_t Mlp::bias_offset(std::size_t layer) const {
  return offsets_[layer] + spec_.layer_sizes[layer + 1] * spec_.layer_sizes[layer];
}

Mlp Mlp::initialize(const MlpSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.init_seed);
  ParamVector params;
  params.reserve(spec.parameter_count());
  for (std::size_t l = 1; l < spec.layer_sizes.size(); ++l) {
    const double fan_in = static_cast<double>(spec.layer_sizes[l - 1]);
    const double fan_out = static_cast<double>(spec.layer_sizes[l]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < spec.layer_sizes[l] * spec.layer_sizes[l - 1]; ++i) params.push_back(dist(rng));
    params.insert(params.end(), spec.layer_sizes[l], 0.0);
  }
  return Mlp(spec, std::move(params));
}

ForwardResult forward_loss(const Mlp& model, const Batch& batch) {
  ForwardResult r;
  r.loss = sweep(model, batch, &r.logits, nullptr);
  return r;
}

ParamVector backward(const Mlp& model, const Batch& batch) {
  ParamVector g;
  sweep(model, batch, nullptr, &g);
  return g;
}

std::pair<double, ParamVector> loss_and_gradient(const Mlp& model, const Batch& batch) {
  ParamVector g;
  const double loss = sweep(model, batch, nullptr, &g);
  return {loss, std::move(g)};
}

std::vector<int> predict_classes(std::span<const double> logits, std::size_t classes) {
  std::vector<int> out(logits.size() / classes);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const auto row = logits.subspan(n * classes, classes);
    // max_element returns the first maximum
    out[n] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(std::span<const double> logits, std::span<const int> labels, std::size_t classes) {
  const auto pred = predict_classes(logits, classes);
  if (pred.size() != labels.size()) throw ContractViolation("logits and labels disagree in length");
  if (pred.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace flatmin
