#include "sanvaad/train.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "sanvaad/error.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace sanvaad {

namespace {

// Sub-stream identifiers for make_rng; fixed so seeded runs reproduce.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kAugmentStream = 2;
constexpr std::uint64_t kBatchStream = 3;

Matrix one_hot_targets(const LabelCodec& codec, std::span<const LabeledSample> samples) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(codec.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(codec.encode(samples[i].label))) = 1.0;
  }
  return y;
}

std::size_t correct_count(const Matrix& probs, const Matrix& targets) {
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index p, t;
    probs.row(i).maxCoeff(&p);
    targets.row(i).maxCoeff(&t);
    if (p == t) ++correct;
  }
  return correct;
}

// Per-batch activations run to a few hundred KB each. Left on glibc's
// default mmap path, every batch re-faults fresh pages, roughly doubling
// step time.
void keep_activations_on_heap() {
#if defined(__GLIBC__)
  static const bool tuned = [] {
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
    return true;
  }();
  (void)tuned;
#endif
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "Adam epsilon must be positive");
  if (batch_size < 1) throw Error(ErrorCode::invalid_argument, "batch size must be at least 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "dropout rate must lie in [0, 1)");
  }
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "batch-norm momentum must lie in [0, 1)");
  }
  if (!(bn_epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "batch-norm epsilon must be positive");
}

std::string epoch_log_csv(const EpochLog& log) {
  std::ostringstream os;
  os << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  os << std::setprecision(17);
  for (const auto& e : log) {
    os << e.epoch << ',' << e.train_loss << ',' << e.train_acc << ',' << e.val_loss << ',' << e.val_acc << '\n';
  }
  return os.str();
}

Score score(const ResidualMlpModel& model, std::span<const LabeledSample> samples) {
  if (samples.empty()) return {};
  const Matrix x = feature_matrix(model.scaler, samples);
  const Matrix y = one_hot_targets(model.codec, samples);
  const Matrix probs = forward_infer(model, x);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index t;
    y.row(i).maxCoeff(&t);
    loss -= std::log(std::max(probs(i, t), 1e-300));
  }
  const double n = static_cast<double>(samples.size());
  return {loss / n, static_cast<double>(correct_count(probs, y)) / n};
}

EpochLog fit(ResidualMlpModel& model, std::span<const LabeledSample> train, std::span<const LabeledSample> validation,
             const TrainConfig& cfg, const AugmentConfig& augment, bool on_the_fly, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::invalid_argument, "training set is empty");
  const auto eval_set = validation.empty() ? train : validation;
  keep_activations_on_heap();

  BatchGenerator batches(train, model.scaler, cfg.batch_size, augment, on_the_fly);
  Rng rng = make_rng(cfg.seed, kBatchStream);
  AdamState adam = AdamState::for_parameters(model.params);
  const AdamConfig adam_cfg = cfg.adam();

  EpochLog log;
  // Epoch 0 runs the same train-mode pass with updates switched off.
  for (std::size_t epoch = 0; epoch <= cfg.epochs; ++epoch) {
    const bool update = epoch > 0;
    batches.start_epoch(rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t seen = 0;
    while (auto batch = batches.next(rng)) {
      const Tape tape = forward_train(model, batch->features, rng);
      const auto rows = static_cast<std::size_t>(batch->features.rows());
      loss_sum += cross_entropy(tape.logits, batch->targets) * static_cast<double>(rows);
      correct += correct_count(tape.probs, batch->targets);
      seen += rows;
      if (!update) continue;
      const Parameters grads = backward(model, tape, batch->targets);
      adam_step(model.params, grads, adam, adam_cfg);
      update_running_stats(model, tape, cfg.bn_momentum);
    }
    const Score va = score(model, eval_set);
    log.push_back({epoch, loss_sum / static_cast<double>(seen), static_cast<double>(correct) / static_cast<double>(seen),
                   va.loss, va.accuracy});
    if (on_epoch) on_epoch(log.back());
  }
  model.meta.epochs += cfg.epochs;
  return log;
}

TrainResult train(std::span<const LabeledSample> dataset, const TrainOptions& options) {
  options.train.validate();
  const std::uint64_t seed = options.train.seed;

  TrainResult result;
  result.split = stratified_split(dataset, SplitSpec{options.train_fraction, seed ^ (kSplitStream << 56)});

  AugmentConfig augment = options.augment;
  augment.seed = seed ^ (kAugmentStream << 56);
  std::vector<LabeledSample> expanded;
  std::span<const LabeledSample> train_set = result.split.train;
  if (options.augment_data) {
    expanded = expand_dataset(result.split.train, augment);
    train_set = expanded;
  }

  std::vector<FeatureVector> features;
  features.reserve(train_set.size());
  for (const auto& s : train_set) features.push_back(extract_features(s.frame));

  NetworkSpec network = options.network;
  network.dropout_rate = options.train.dropout_rate;
  network.bn_epsilon = options.train.bn_epsilon;
  result.model = init_model(network, seed);
  result.model.scaler = fit_scaler(features);
  result.model.meta.augmented = options.augment_data;
  result.model.meta.on_the_fly = options.on_the_fly;

  result.log = fit(result.model, train_set, result.split.test, options.train, augment, options.on_the_fly,
                   options.on_epoch);
  round_to_f32(result.model);
  return result;
}

}  // namespace sanvaad
