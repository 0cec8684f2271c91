#include <gtest/gtest.h>

#include <cmath>

#include "sanvaad/error.hpp"
#include "sanvaad/synthetic.hpp"
#include "sanvaad/train.hpp"

namespace sanvaad {
namespace {

TrainOptions small_options(std::uint64_t seed, std::size_t epochs) {
  TrainOptions o;
  o.network.hidden_width = 64;
  o.network.compression_width = 32;
  o.network.residual_blocks = 1;
  o.train.epochs = epochs;
  o.train.batch_size = 32;
  o.train.learning_rate = 0.005;
  o.train.seed = seed;
  return o;
}

SyntheticDataset small_data(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.classes = 6;
  spec.per_class = 30;
  spec.seed = seed;
  return make_blob_dataset(spec);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.bn_momentum = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Synthetic, CentersRespectSeparation) {
  SyntheticSpec spec;
  spec.per_class = 3;
  const auto d = make_blob_dataset(spec);
  EXPECT_EQ(d.samples.size(), 35u * 3u);
  EXPECT_EQ(d.centers.size(), 35u);
  EXPECT_GE(d.min_center_distance, spec.separation * spec.sigma - 1e-12);
  EXPECT_EQ(d.samples.front().label, "1");
  EXPECT_EQ(d.samples.back().label, "Z");
}

TEST(Train, LearnsSmallBlobsAndLogsEpochZero) {
  const auto data = small_data(1);
  const TrainResult r = train(data.samples, small_options(1, 20));
  ASSERT_EQ(r.log.size(), 21u);
  EXPECT_EQ(r.log[0].epoch, 0u);
  EXPECT_NEAR(r.log[0].val_loss, std::log(35.0), 0.5);
  EXPECT_LT(r.log.back().val_loss, r.log[0].val_loss);
  EXPECT_GE(r.log.back().val_acc, 0.9);
  EXPECT_EQ(r.split.train.size(), 6u * 24u);
  EXPECT_EQ(r.model.meta.epochs, 20u);
  EXPECT_TRUE(r.model.meta.augmented);
  for (auto& v : const_cast<ResidualMlpModel&>(r.model).params.views()) {
    for (double x : v.values()) ASSERT_EQ(x, static_cast<double>(static_cast<float>(x)));
  }
}

TEST(Train, DeterministicUnderSeed) {
  const auto data = small_data(2);
  const TrainResult a = train(data.samples, small_options(2, 3));
  const TrainResult b = train(data.samples, small_options(2, 3));
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.log[i].val_acc, b.log[i].val_acc);
  }
  EXPECT_EQ(a.model.params.output.weight, b.model.params.output.weight);
  const TrainResult c = train(data.samples, small_options(3, 3));
  EXPECT_NE(a.model.params.output.weight, c.model.params.output.weight);
}

TEST(Train, CallbackAndCsv) {
  const auto data = small_data(4);
  TrainOptions o = small_options(4, 2);
  o.augment_data = false;
  o.on_the_fly = true;
  std::vector<std::size_t> seen;
  o.on_epoch = [&](const EpochStats& s) { seen.push_back(s.epoch); };
  const TrainResult r = train(data.samples, o);
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_FALSE(r.model.meta.augmented);
  EXPECT_TRUE(r.model.meta.on_the_fly);
  const std::string csv = epoch_log_csv(r.log);
  EXPECT_EQ(csv.rfind("epoch,train_loss,train_acc,val_loss,val_acc\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Train, ScoreMatchesLogOnValidation) {
  const auto data = small_data(5);
  const TrainResult r = train(data.samples, small_options(5, 2));
  const Score s = score(r.model, r.split.test);
  EXPECT_NEAR(s.accuracy, r.log.back().val_acc, 1e-12);
  EXPECT_NEAR(s.loss, r.log.back().val_loss, 1e-4);
}

}  // namespace
}  // namespace sanvaad
