#pragma once

#include <cstdint>
#include <vector>

#include "sanvaad/landmarks.hpp"

namespace sanvaad {

/// Gaussian-blob landmark data: one random two-hand pose per class, samples
/// drawn around it with per-coordinate noise sigma. Class centers sit at a
/// minimum pairwise distance of exactly `separation * sigma`.
struct SyntheticSpec {
  std::size_t classes = kNumClasses;
  std::size_t per_class = 200;
  double sigma = 0.01;
  double separation = 10.0;  // in units of sigma
  bool two_hands = true;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  std::vector<LabeledSample> samples;  // grouped by class, label_set() order
  std::vector<LandmarkFrame> centers;
  double min_center_distance = 0.0;  // over coordinate space
};

SyntheticDataset make_blob_dataset(const SyntheticSpec& spec);

}  // namespace sanvaad
