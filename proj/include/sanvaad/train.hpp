#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sanvaad/augment.hpp"
#include "sanvaad/model.hpp"
#include "sanvaad/preprocess.hpp"

namespace sanvaad {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
  double dropout_rate = 0.3;
  double bn_momentum = 0.9;
  double bn_epsilon = 1e-5;
  std::uint64_t seed = 0;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, adam_epsilon}; }
};

/// One row of the training log. Train columns average train-mode batch
/// loss/accuracy; val columns score the validation split in infer mode.
/// Epoch 0 measures the untrained model.
struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

using EpochLog = std::vector<EpochStats>;

/// CSV with header `epoch,train_loss,train_acc,val_loss,val_acc`.
std::string epoch_log_csv(const EpochLog& log);

using EpochCallback = std::function<void(const EpochStats&)>;

/// Runs `cfg.epochs` epochs of shuffled mini-batch Adam over `train`, scoring
/// `validation` after each. The model's scaler must already be fitted.
/// Without a validation set the val columns repeat the train-set infer score.
EpochLog fit(ResidualMlpModel& model, std::span<const LabeledSample> train,
             std::span<const LabeledSample> validation, const TrainConfig& cfg,
             const AugmentConfig& augment, bool on_the_fly, const EpochCallback& on_epoch = {});

struct TrainOptions {
  NetworkSpec network = NetworkSpec::table_one();
  TrainConfig train;
  AugmentConfig augment;
  bool augment_data = true;  // offline 3x expansion of the train split
  bool on_the_fly = false;   // per-sample dropout inside the batch generator
  double train_fraction = 0.8;
  EpochCallback on_epoch;
};

struct TrainResult {
  ResidualMlpModel model;
  EpochLog log;
  Split split;  // as drawn, before augmentation
};

/// split -> (augment) -> fit scaler on train -> batches -> epochs. Every
/// random choice derives from options.train.seed. The returned model's
/// reals are rounded to f32.
TrainResult train(std::span<const LabeledSample> dataset, const TrainOptions& options);

/// Mean cross-entropy and accuracy of infer-mode predictions.
struct Score {
  double loss = 0.0;
  double accuracy = 0.0;
};
Score score(const ResidualMlpModel& model, std::span<const LabeledSample> samples);

}  // namespace sanvaad
