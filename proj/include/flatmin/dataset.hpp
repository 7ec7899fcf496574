#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flatmin/mlp.hpp"

namespace flatmin {

/// Labelled samples with a fixed train/test partition. Label noise, when
/// injected, touches train labels only; `clean_labels` keeps the originals.
struct Dataset {
  std::vector<double> inputs;  // row-major, size() x input_dim
  std::size_t input_dim = 0;
  std::vector<int> labels;
  std::vector<int> clean_labels;
  int num_classes = 0;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  double noise_rate = 0.0;

  std::size_t size() const noexcept { return labels.size(); }
  Batch gather(std::span<const std::size_t> idx) const;
  Batch train_batch() const { return gather(train_idx); }
  Batch test_batch() const { return gather(test_idx); }
};

/// Gaussian clusters whose centers sit evenly on a circle of radius 3 in the
/// first two input coordinates; every coordinate gets N(0, spread^2) noise.
/// Shuffled with `seed` and split 80/20 into train/test.
Dataset make_blobs(int classes, int per_class, double spread, std::uint64_t seed,
                   std::size_t input_dim = 20);

/// Flips exactly round(rate * N_train) distinct train labels, each to a
/// uniformly chosen different class.
Dataset inject_label_noise(const Dataset& ds, double rate, std::uint64_t seed);

/// Reads an IDX image file (magic 0x00000803, unsigned bytes) and label file
/// (magic 0x00000801). Pixels are scaled to [0, 1]; split 80/20 by `seed`.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::uint64_t seed);

}  // namespace flatmin
