#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sanvaad/landmarks.hpp"

namespace sanvaad {

/// Per-dimension z-score parameters. std is the population standard deviation.
struct ScalerParams {
  std::array<double, kFeatureDim> mean{};
  std::array<double, kFeatureDim> std{};

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

/// Variance floor applied when standardizing; zero-variance dimensions map to 0.
inline constexpr double kScalerEpsilon = 1e-8;

/// Requires at least two vectors.
ScalerParams fit_scaler(std::span<const FeatureVector> features);

/// (v - mean) / max(std, kScalerEpsilon). Total.
FeatureVector standardize(const ScalerParams& params, const FeatureVector& v);

/// Bidirectional mapping between class symbols and indices [0, 35).
class LabelCodec {
 public:
  LabelCodec();

  std::size_t size() const noexcept { return classes_.size(); }
  const std::vector<std::string>& classes() const noexcept { return classes_; }

  std::size_t encode(std::string_view label) const;
  const std::string& decode(std::size_t index) const;
  std::array<double, kNumClasses> one_hot(std::string_view label) const;

  friend bool operator==(const LabelCodec&, const LabelCodec&) = default;

 private:
  std::vector<std::string> classes_;
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
};

/// Each class c with n_c samples sends round(train_fraction * n_c) to train,
/// chosen by a seeded shuffle inside the class. Output keeps classes in
/// label_set() order. Throws naming any class with fewer than 2 samples.
Split stratified_split(std::span<const LabeledSample> samples, const SplitSpec& spec);

}  // namespace sanvaad
