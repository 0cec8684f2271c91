#include "sanvaad/augment.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "sanvaad/error.hpp"

namespace sanvaad {

void AugmentConfig::validate() const {
  if (!(noise_sigma > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "noise sigma must be positive");
  }
  if (!(dropout_apply_prob >= 0.0 && dropout_apply_prob <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "dropout probability must lie in [0, 1]");
  }
  if (dropout_min_keypoints < 1 || dropout_min_keypoints > dropout_max_keypoints ||
      dropout_max_keypoints > kKeypointsPerHand) {
    throw Error(ErrorCode::invalid_argument, "dropout keypoint range must satisfy 1 <= min <= max <= 21");
  }
}

LandmarkFrame gaussian_noise(const LandmarkFrame& frame, const AugmentConfig& cfg, Rng& rng) {
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  LandmarkFrame out = frame;
  for (auto* hand : {&out.left, &out.right}) {
    if (!*hand) continue;
    for (auto& k : (*hand)->keypoints) {
      k.x += noise(rng);
      k.y += noise(rng);
      k.z += noise(rng);
    }
  }
  return out;
}

LandmarkFrame landmark_dropout(const LandmarkFrame& frame, const AugmentConfig& cfg, Rng& rng) {
  std::uniform_int_distribution<std::size_t> count(cfg.dropout_min_keypoints, cfg.dropout_max_keypoints);
  LandmarkFrame out = frame;
  std::array<std::size_t, kKeypointsPerHand> indices;
  for (auto* hand : {&out.left, &out.right}) {
    if (!*hand) continue;
    const std::size_t k = count(rng);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, kKeypointsPerHand - 1);
      std::swap(indices[i], indices[pick(rng)]);
      (*hand)->keypoints[indices[i]] = Keypoint{0.0, 0.0, 0.0};
    }
  }
  return out;
}

std::vector<LabeledSample> expand_dataset(std::span<const LabeledSample> samples, const AugmentConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw Error(ErrorCode::invalid_argument, "cannot expand an empty dataset");
  Rng rng = make_rng(cfg.seed, 0xA06);
  std::vector<LabeledSample> out;
  out.reserve(samples.size() * 3);
  for (const auto& s : samples) {
    out.push_back(s);
    out.push_back(LabeledSample{gaussian_noise(s.frame, cfg, rng), s.label});
    out.push_back(LabeledSample{landmark_dropout(s.frame, cfg, rng), s.label});
  }
  return out;
}

namespace {

void write_row(Matrix& m, Eigen::Index row, const FeatureVector& v) {
  for (std::size_t d = 0; d < kFeatureDim; ++d) m(row, static_cast<Eigen::Index>(d)) = v[d];
}

}  // namespace

BatchGenerator::BatchGenerator(std::span<const LabeledSample> samples, const ScalerParams& scaler,
                               std::size_t batch_size, AugmentConfig cfg, bool on_the_fly)
    : samples_(samples), scaler_(scaler), batch_size_(batch_size), cfg_(cfg), on_the_fly_(on_the_fly) {
  if (batch_size_ < 1) throw Error(ErrorCode::invalid_argument, "batch size must be at least 1");
  if (on_the_fly_) cfg_.validate();
  const LabelCodec codec;
  standardized_.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(kFeatureDim));
  labels_.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    write_row(standardized_, static_cast<Eigen::Index>(i), standardize(scaler_, extract_features(samples[i].frame)));
    labels_.push_back(codec.encode(samples[i].label));
  }
  order_.resize(samples.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  cursor_ = order_.size();
}

void BatchGenerator::start_epoch(Rng& rng) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), rng);
  cursor_ = 0;
}

std::optional<Batch> BatchGenerator::next(Rng& rng) {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t n = std::min(batch_size_, order_.size() - cursor_);
  Batch batch;
  batch.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kFeatureDim));
  batch.targets = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kNumClasses));
  batch.indices.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                       order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + n));
  std::bernoulli_distribution apply(cfg_.dropout_apply_prob);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t idx = batch.indices[r];
    const auto row = static_cast<Eigen::Index>(r);
    if (on_the_fly_ && apply(rng)) {
      ++dropout_applied_;
      write_row(batch.features, row, standardize(scaler_, extract_features(landmark_dropout(samples_[idx].frame, cfg_, rng))));
    } else {
      batch.features.row(row) = standardized_.row(static_cast<Eigen::Index>(idx));
    }
    batch.targets(row, static_cast<Eigen::Index>(labels_[idx])) = 1.0;
  }
  cursor_ += n;
  return batch;
}

}  // namespace sanvaad
