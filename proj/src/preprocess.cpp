#include "sanvaad/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sanvaad/error.hpp"

namespace sanvaad {

ScalerParams fit_scaler(std::span<const FeatureVector> features) {
  if (features.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "fit_scaler needs at least two samples");
  }
  const double n = static_cast<double>(features.size());
  ScalerParams params;
  for (const auto& f : features) {
    for (std::size_t d = 0; d < kFeatureDim; ++d) params.mean[d] += f[d];
  }
  for (auto& m : params.mean) m /= n;

  // Two-pass: squared deviations about the finished mean.
  std::array<double, kFeatureDim> ss{};
  for (const auto& f : features) {
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      const double dev = f[d] - params.mean[d];
      ss[d] += dev * dev;
    }
  }
  for (std::size_t d = 0; d < kFeatureDim; ++d) params.std[d] = std::sqrt(ss[d] / n);
  return params;
}

FeatureVector standardize(const ScalerParams& params, const FeatureVector& v) {
  FeatureVector out;
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    out[d] = (v[d] - params.mean[d]) / std::max(params.std[d], kScalerEpsilon);
  }
  return out;
}

LabelCodec::LabelCodec() : classes_(label_set().begin(), label_set().end()) {}

std::size_t LabelCodec::encode(std::string_view label) const {
  auto idx = label_index(label);
  if (!idx) throw Error(ErrorCode::unmapped_label, "unknown label: '" + std::string(label) + "'");
  return *idx;
}

const std::string& LabelCodec::decode(std::size_t index) const {
  if (index >= classes_.size()) {
    throw Error(ErrorCode::invalid_argument, "class index out of range: " + std::to_string(index));
  }
  return classes_[index];
}

std::array<double, kNumClasses> LabelCodec::one_hot(std::string_view label) const {
  std::array<double, kNumClasses> out{};
  out[encode(label)] = 1.0;
  return out;
}

Split stratified_split(std::span<const LabeledSample> samples, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "train_fraction must lie in (0, 1)");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto idx = label_index(samples[i].label);
    if (!idx) throw Error(ErrorCode::unmapped_label, "unknown label: '" + samples[i].label + "'");
    by_class[*idx].push_back(i);
  }

  std::mt19937_64 rng(spec.seed);
  Split split;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw Error(ErrorCode::invalid_argument,
                  "class '" + label_set()[c] + "' has fewer than 2 samples; cannot stratify");
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train =
        static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < n_train ? split.train : split.test).push_back(samples[members[k]]);
    }
  }
  return split;
}

}  // namespace sanvaad
