#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sanvaad/landmarks.hpp"
#include "sanvaad/preprocess.hpp"
#include "sanvaad/random.hpp"
#include "sanvaad/tensor.hpp"

namespace sanvaad {

struct AugmentConfig {
  double noise_sigma = 0.02;         // normalized landmark coordinate units
  double dropout_apply_prob = 0.15;  // per-sample, on-the-fly batching only
  std::size_t dropout_min_keypoints = 1;
  std::size_t dropout_max_keypoints = 6;
  std::uint64_t seed = 0;

  /// Throws Error(invalid_argument) on out-of-range fields.
  void validate() const;
};

/// Adds i.i.d. N(0, sigma^2) to every coordinate of every present keypoint.
LandmarkFrame gaussian_noise(const LandmarkFrame& frame, const AugmentConfig& cfg, Rng& rng);

/// For each present hand: draws k uniformly in [min, max] and zeroes k
/// distinct keypoints chosen uniformly.
LandmarkFrame landmark_dropout(const LandmarkFrame& frame, const AugmentConfig& cfg, Rng& rng);

/// Offline 3x expansion: each sample becomes [original, noise variant,
/// dropout variant]. Deterministic under cfg.seed.
std::vector<LabeledSample> expand_dataset(std::span<const LabeledSample> samples, const AugmentConfig& cfg);

struct Batch {
  Matrix features;  // rows x 141, standardized
  Matrix targets;   // rows x 35, one-hot
  std::vector<std::size_t> indices;
};

/// Shuffled mini-batches over a fixed sample set. Each start_epoch()
/// reshuffles; the final short batch is emitted. With on_the_fly enabled,
/// each drawn sample independently receives landmark dropout with
/// probability cfg.dropout_apply_prob before its features are recomputed.
class BatchGenerator {
 public:
  BatchGenerator(std::span<const LabeledSample> samples, const ScalerParams& scaler,
                 std::size_t batch_size, AugmentConfig cfg, bool on_the_fly);

  void start_epoch(Rng& rng);
  std::optional<Batch> next(Rng& rng);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t batch_size() const noexcept { return batch_size_; }
  std::size_t batches_per_epoch() const noexcept { return (size() + batch_size_ - 1) / batch_size_; }
  /// Samples that received on-the-fly dropout since construction.
  std::size_t dropout_applied() const noexcept { return dropout_applied_; }

 private:
  std::span<const LabeledSample> samples_;
  const ScalerParams& scaler_;
  std::size_t batch_size_;
  AugmentConfig cfg_;
  bool on_the_fly_;
  Matrix standardized_;
  std::vector<std::size_t> labels_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t dropout_applied_ = 0;
};

}  // namespace sanvaad
