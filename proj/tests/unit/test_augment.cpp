#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "sanvaad/augment.hpp"
#include "sanvaad/error.hpp"
#include "sanvaad/synthetic.hpp"
#include "support.hpp"

namespace sanvaad {
namespace {

std::size_t zeroed_keypoints(const Hand& h) {
  std::size_t n = 0;
  for (const auto& k : h.keypoints) n += (k.x == 0.0 && k.y == 0.0 && k.z == 0.0);
  return n;
}

TEST(Augment, ConfigValidation) {
  AugmentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.noise_sigma = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.dropout_min_keypoints = 7;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.dropout_max_keypoints = 22;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.dropout_apply_prob = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Augment, NoiseHasConfiguredStd) {
  Rng rng = make_rng(41);
  AugmentConfig cfg;
  LandmarkFrame f;
  f.right = Hand{};
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  while (n < 100000) {
    const LandmarkFrame g = gaussian_noise(f, cfg, rng);
    EXPECT_FALSE(g.left.has_value());
    for (const auto& k : g.right->keypoints) {
      for (double v : {k.x, k.y, k.z}) {
        sum += v;
        sq += v * v;
        ++n;
      }
    }
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(sd, 0.02, 0.02 * 0.02);
  EXPECT_NEAR(mean, 0.0, 5.0 * 0.02 / std::sqrt(static_cast<double>(n)));
}

TEST(Augment, DropoutZeroesOneToSixDistinctKeypoints) {
  Rng rng = make_rng(42);
  AugmentConfig cfg;
  LandmarkFrame f;
  f.left = testing::random_hand(rng);
  f.right = testing::random_hand(rng);
  double total = 0.0;
  std::set<std::size_t> seen;
  const std::size_t draws = 10000;
  for (std::size_t i = 0; i < draws; ++i) {
    const LandmarkFrame g = landmark_dropout(f, cfg, rng);
    const std::size_t k = zeroed_keypoints(*g.left);
    ASSERT_GE(k, 1u);
    ASSERT_LE(k, 6u);
    seen.insert(k);
    total += static_cast<double>(k);
    for (std::size_t j = 0; j < kKeypointsPerHand; ++j) {
      const auto& kp = g.right->keypoints[j];
      if (!(kp.x == 0.0 && kp.y == 0.0 && kp.z == 0.0)) {
        ASSERT_EQ(kp, f.right->keypoints[j]);
      }
    }
  }
  EXPECT_EQ(seen.size(), 6u);
  EXPECT_NEAR(total / draws, 3.5, 0.1);
}

TEST(Augment, ExpandTriplesAndKeepsOriginals) {
  SyntheticSpec spec;
  spec.classes = 5;
  spec.per_class = 200;
  const auto data = make_blob_dataset(spec);
  ASSERT_EQ(data.samples.size(), 1000u);
  AugmentConfig cfg;
  cfg.seed = 3;
  const auto out = expand_dataset(data.samples, cfg);
  ASSERT_EQ(out.size(), 3000u);
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    EXPECT_EQ(out[3 * i], data.samples[i]);
    EXPECT_EQ(out[3 * i + 1].label, data.samples[i].label);
    EXPECT_EQ(out[3 * i + 2].label, data.samples[i].label);
    EXPECT_NE(out[3 * i + 1], data.samples[i]);
    EXPECT_GE(zeroed_keypoints(*out[3 * i + 2].frame.left), 1u);
  }
  EXPECT_EQ(expand_dataset(data.samples, cfg), out);
}

TEST(BatchGenerator, CoversEverySampleOncePerEpoch) {
  SyntheticSpec spec;
  spec.classes = 5;
  spec.per_class = 26;
  const auto data = make_blob_dataset(spec);
  ASSERT_EQ(data.samples.size(), 130u);
  std::vector<FeatureVector> f;
  for (const auto& s : data.samples) f.push_back(extract_features(s.frame));
  const ScalerParams scaler = fit_scaler(f);
  BatchGenerator gen(data.samples, scaler, 64, {}, false);
  EXPECT_EQ(gen.batches_per_epoch(), 3u);
  Rng rng = make_rng(43);
  for (int epoch = 0; epoch < 2; ++epoch) {
    gen.start_epoch(rng);
    std::vector<Eigen::Index> sizes;
    std::multiset<std::size_t> seen;
    while (auto b = gen.next(rng)) {
      sizes.push_back(b->features.rows());
      EXPECT_EQ(b->targets.cols(), static_cast<Eigen::Index>(kNumClasses));
      EXPECT_EQ(b->features.cols(), static_cast<Eigen::Index>(kFeatureDim));
      for (std::size_t i = 0; i < b->indices.size(); ++i) {
        seen.insert(b->indices[i]);
        const std::size_t cls = *label_index(data.samples[b->indices[i]].label);
        EXPECT_EQ(b->targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cls)), 1.0);
      }
    }
    EXPECT_EQ(sizes, (std::vector<Eigen::Index>{64, 64, 2}));
    ASSERT_EQ(seen.size(), 130u);
    for (std::size_t i = 0; i < 130; ++i) EXPECT_EQ(seen.count(i), 1u);
  }
}

TEST(BatchGenerator, OnTheFlyDropoutRate) {
  SyntheticSpec spec;
  spec.classes = 5;
  spec.per_class = 200;
  const auto data = make_blob_dataset(spec);
  std::vector<FeatureVector> f;
  for (const auto& s : data.samples) f.push_back(extract_features(s.frame));
  const ScalerParams scaler = fit_scaler(f);
  BatchGenerator gen(data.samples, scaler, 64, {}, true);
  Rng rng = make_rng(44);
  const std::size_t epochs = 5;
  for (std::size_t e = 0; e < epochs; ++e) {
    gen.start_epoch(rng);
    while (gen.next(rng)) {
    }
  }
  const double rate = static_cast<double>(gen.dropout_applied()) / static_cast<double>(epochs * gen.size());
  EXPECT_NEAR(rate, 0.15, 0.02);
}

}  // namespace
}  // namespace sanvaad
