#include "flatmin/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "flatmin/errors.hpp"

namespace flatmin {

namespace {

void split_train_test(Dataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = (ds.size() * 4) / 5;
  ds.train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
}

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("truncated IDX header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace

Batch Dataset::gather(std::span<const std::size_t> idx) const {
  Batch b;
  b.input_dim = input_dim;
  b.inputs.reserve(idx.size() * input_dim);
  b.labels.reserve(idx.size());
  for (std::size_t i : idx) {
    const auto first = inputs.begin() + static_cast<std::ptrdiff_t>(i * input_dim);
    b.inputs.insert(b.inputs.end(), first, first + static_cast<std::ptrdiff_t>(input_dim));
    b.labels.push_back(labels[i]);
  }
  return b;
}

Dataset make_blobs(int classes, int per_class, double spread, std::uint64_t seed,
                   std::size_t input_dim) {
  if (classes < 2) throw ContractViolation("make_blobs needs classes >= 2");
  if (per_class < 1) throw ContractViolation("make_blobs needs per_class >= 1");
  if (!(spread >= 0.0)) throw ContractViolation("spread must be >= 0");
  if (input_dim < 2) throw ContractViolation("make_blobs needs input_dim >= 2");

  constexpr double kRadius = 3.0;
  Dataset ds;
  ds.input_dim = input_dim;
  ds.num_classes = classes;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int c = 0; c < classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / classes;
    for (int k = 0; k < per_class; ++k) {
      for (std::size_t d = 0; d < input_dim; ++d) {
        double center = 0.0;
        if (d == 0) center = kRadius * std::cos(angle);
        if (d == 1) center = kRadius * std::sin(angle);
        ds.inputs.push_back(center + spread * noise(rng));
      }
      ds.labels.push_back(c);
    }
  }
  ds.clean_labels = ds.labels;
  split_train_test(ds, rng());
  return ds;
}

Dataset inject_label_noise(const Dataset& ds, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ContractViolation("noise rate must lie in [0, 1)");
  if (ds.num_classes < 2) throw ContractViolation("label noise needs >= 2 classes");
  Dataset out = ds;
  out.noise_rate = rate;
  const auto flips = static_cast<std::size_t>(std::llround(rate * static_cast<double>(ds.train_idx.size())));
  if (flips == 0) return out;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool = ds.train_idx;
  // partial Fisher-Yates: the first `flips` entries are a uniform sample
  for (std::size_t i = 0; i < flips; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::uniform_int_distribution<int> other(1, ds.num_classes - 1);
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t idx = pool[i];
    out.labels[idx] = (ds.labels[idx] + other(rng)) % ds.num_classes;
  }
  return out;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::uint64_t seed) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open " + images.string());
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot open " + labels.string());

  if (read_be32(img, images) != 0x00000803) throw std::runtime_error("bad IDX image magic in " + images.string());
  const std::uint32_t count = read_be32(img, images);
  const std::uint32_t rows = read_be32(img, images);
  const std::uint32_t cols = read_be32(img, images);
  if (read_be32(lab, labels) != 0x00000801) throw std::runtime_error("bad IDX label magic in " + labels.string());
  if (read_be32(lab, labels) != count) throw std::runtime_error("IDX image/label counts differ");

  Dataset ds;
  ds.input_dim = std::size_t{rows} * cols;
  std::vector<unsigned char> pixels(std::size_t{count} * ds.input_dim);
  if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()))) {
    throw std::runtime_error("truncated IDX image data in " + images.string());
  }
  std::vector<unsigned char> raw(count);
  if (!lab.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw std::runtime_error("truncated IDX label data in " + labels.string());
  }
  ds.inputs.reserve(pixels.size());
  for (unsigned char p : pixels) ds.inputs.push_back(p / 255.0);
  ds.labels.assign(raw.begin(), raw.end());
  ds.clean_labels = ds.labels;
  ds.num_classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  if (ds.num_classes < 2) throw std::runtime_error("IDX labels span fewer than 2 classes");
  split_train_test(ds, seed);
  return ds;
}

}  // namespace flatmin
